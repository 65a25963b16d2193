"""
Runtime benchmark: forest estimators against CG and Chebyshev filtering

This script:
1. Builds every graph in BENCH_GRAPHS
2. Plants bandlimited signals (BENCH_K lowest modes, BENCH_SNR) and tunes q
3. Sweeps forests / iterations / polynomial degree over BENCH_SWEEP and
   records approximation error, reconstruction error and runtime
4. Writes one CSV per graph plus its reference row (exact solve time, plateau)

Input:  none (graphs are generated, seeded with SEED)
Output: data/results/reports/bench_<graph>.csv, bench_<graph>_reference.csv
"""

import sys
from pathlib import Path

# ============================================
# SETUP: Add project root to Python path
# ============================================
PROJECT_ROOT = Path(__file__).parent.parent.parent
sys.path.insert(0, str(PROJECT_ROOT))

# ============================================
# IMPORTS FROM CONFIG
# ============================================
from config import (
    BENCH_GRAPHS,
    BENCH_K,
    BENCH_REALIZATIONS,
    BENCH_SNR,
    BENCH_SWEEP,
    BENCH_TEMPLATE,
    BENCH_TIMING_RUNS,
    RESULTS_REPORTS_DIR,
    SEED,
    THREADS,
)

# ============================================
# OTHER IMPORTS
# ============================================
import re
import time

import numpy as np

from rsfsmooth.bench import BenchConfig, parse_sweep, run_bench, write_bench_csv

RESULTS_REPORTS_DIR.mkdir(parents=True, exist_ok=True)


def file_stem(spec):
    """grid:100x100:periodic -> grid_100x100_periodic"""
    return re.sub(r"[^A-Za-z0-9]+", "_", spec).strip("_")


sweep = tuple(parse_sweep(BENCH_SWEEP).tolist())

print("=" * 60)
print("RUNTIME BENCHMARK")
print("=" * 60)
print(f"Graphs:       {len(BENCH_GRAPHS)}")
print(f"Sweep:        {BENCH_SWEEP} ({len(sweep)} values)")
print(f"Realizations: {BENCH_REALIZATIONS}, timing runs: {BENCH_TIMING_RUNS}")

written = []
total = len(BENCH_GRAPHS)

for i, spec in enumerate(BENCH_GRAPHS, start=1):
    print(f"\n[{i}/{total}] {spec}")
    cfg = BenchConfig(graph=spec, k=BENCH_K, snr=BENCH_SNR, sweep=sweep,
                      realizations=BENCH_REALIZATIONS, timing_runs=BENCH_TIMING_RUNS,
                      seed=SEED, threads=THREADS)

    start = time.perf_counter()
    report = run_bench(cfg)
    print(f"  Done in {time.perf_counter() - start:.1f} s")
    print(f"  Exact solve: {report.exact_time_s:.4f} s, plateau error: {report.plateau_err:.4g}")

    failed = sum(1 for r in report.records if not np.isfinite(r.approx_err))
    if failed:
        print(f"  [WARNING] {failed} cells failed (NaN in the CSV)")

    out = RESULTS_REPORTS_DIR / BENCH_TEMPLATE.format(name=file_stem(spec))
    write_bench_csv(out, report)
    written.append(out)
    print(f"  [OK] {out.name}")

# ============================================
# SUMMARY
# ============================================
print("\n" + "=" * 60)
print("RUNTIME BENCHMARK COMPLETE")
print("=" * 60)
for path in written:
    print(f"Saved: {path}")
print("=" * 60)
