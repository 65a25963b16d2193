"""
Error-vs-runtime figures of the benchmark

This script:
1. Reads every bench_<graph>.csv and its reference file
2. Plots approximation and reconstruction error against run time per method
3. Marks the exact solve time and the reconstruction error plateau

Input:  data/results/reports/bench_*.csv (runtime_benchmark.py)
Output: data/results/figures/bench_<graph>.png
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
from config import RESULTS_FIGURES_DIR, RESULTS_REPORTS_DIR

# ============================================
# OTHER IMPORTS
# ============================================
from rsfsmooth.bench import plot_bench, read_bench_csv, reference_path

RESULTS_FIGURES_DIR.mkdir(parents=True, exist_ok=True)

bench_files = sorted(p for p in RESULTS_REPORTS_DIR.glob("bench_*.csv")
                     if not p.stem.endswith("_reference"))

print("=" * 60)
print("ERROR VS RUNTIME")
print("=" * 60)
print(f"Benchmark files: {len(bench_files)}")

for i, path in enumerate(bench_files, start=1):
    print(f"\n[{i}/{len(bench_files)}] {path.name}")
    records = read_bench_csv(path)

    # graph,exact_time_s,plateau_err,mean_q
    plateau_err = exact_time_s = None
    reference = reference_path(path)
    if reference.exists():
        _, exact_time, plateau, _ = reference.read_text().splitlines()[1].split(",")
        exact_time_s, plateau_err = float(exact_time), float(plateau)
    else:
        print(f"  [WARNING] {reference.name} missing, no reference lines")

    out = RESULTS_FIGURES_DIR / f"{path.stem}.png"
    plot_bench(records, out, plateau_err=plateau_err, exact_time_s=exact_time_s)
    print(f"  [OK] {out.name}")

# ============================================
# SUMMARY
# ============================================
print("\n" + "=" * 60)
print("ERROR VS RUNTIME COMPLETE")
print("=" * 60)
print(f"Figures: {RESULTS_FIGURES_DIR}")
print("=" * 60)
