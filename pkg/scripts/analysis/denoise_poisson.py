"""
Poisson image denoising with Newton's method

This script:
1. Loads the Poisson counts and clean intensities of each test image
2. Runs Newton's method with exact steps and with forest (bar) steps
3. Writes the loss traces, the estimated intensities and a PSNR table

Input:  data/preprocessed/images/<name>_counts.csv, <name>_intensity.csv
Output: data/results/reports/newton_trace_<name>.csv, psnr_poisson.csv
        data/results/signals/<name>_poisson_<method>.csv
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
    IMAGE_NAMES,
    IMAGE_SIZE,
    N_FORESTS,
    POISSON_MAX_ITERS,
    POISSON_MU,
    POISSON_TABLE,
    RESULTS_REPORTS_DIR,
    RESULTS_SIGNALS_DIR,
    SEED,
    THREADS,
    TRACE_TEMPLATE,
    image_paths,
)

# ============================================
# OTHER IMPORTS
# ============================================
from rsfsmooth.bench import run_denoise_poisson, write_poisson_traces
from rsfsmooth.graph import grid2d, load_signal_csv, save_signal_csv

RESULTS_REPORTS_DIR.mkdir(parents=True, exist_ok=True)
RESULTS_SIGNALS_DIR.mkdir(parents=True, exist_ok=True)

print("=" * 60)
print("POISSON DENOISING")
print("=" * 60)
print(f"Mu:            {POISSON_MU}")
print(f"Forests (N):   {N_FORESTS}")
print(f"Max Newton it: {POISSON_MAX_ITERS}")

g = grid2d(IMAGE_SIZE, IMAGE_SIZE)
rows = []
total = len(IMAGE_NAMES)

for i, name in enumerate(IMAGE_NAMES, start=1):
    print(f"\n[{i}/{total}] {name}")
    paths = image_paths(name)
    if not paths["counts"].exists():
        print(f"  [SKIP] {paths['counts'].name} not found, run make_test_images.py first")
        continue

    counts = load_signal_csv(paths["counts"], g.n)
    intensity = load_signal_csv(paths["intensity"], g.n)

    report = run_denoise_poisson(g, counts, POISSON_MU, intensity=intensity, n_forests=N_FORESTS,
                                 seed=SEED, threads=THREADS, max_iters=POISSON_MAX_ITERS)
    write_poisson_traces(RESULTS_REPORTS_DIR / TRACE_TEMPLATE.format(name=name), report)

    for method, trace in report.traces.items():
        save_signal_csv(RESULTS_SIGNALS_DIR / f"{name}_poisson_{method}.csv",
                        report.intensity[method])
        state = "converged" if trace.converged else "stopped"
        print(f"    {method:<6} {state} after {len(trace.losses)} iterations, "
              f"loss {trace.final_loss:.6g}")
    for method, value in report.psnr.items():
        rows.append((name, method, value))
        print(f"    {method:<6} PSNR = {value:.2f} dB")

# ============================================
# SAVE PSNR TABLE
# ============================================
with open(POISSON_TABLE, "w") as fh:
    fh.write("image,method,psnr\n")
    for name, method, value in rows:
        fh.write(f"{name},{method},{value!r}\n")

# ============================================
# SUMMARY
# ============================================
print("\n" + "=" * 60)
print("POISSON DENOISING COMPLETE")
print("=" * 60)
print(f"PSNR table: {POISSON_TABLE}")
print(f"Traces:     {RESULTS_REPORTS_DIR}")
print("=" * 60)
