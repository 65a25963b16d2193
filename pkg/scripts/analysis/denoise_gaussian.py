"""
Gaussian image denoising with SURE-tuned smoothing

This script:
1. Loads each clean / noisy test image pair
2. Scores the MU_GRID candidates by SURE for the exact smoother and for the
   forest estimators (tilde and bar), N_FORESTS forests per candidate
3. Smooths with each method's chosen mu and measures PSNR against the clean image
4. Writes the SURE curves, the denoised images and one PSNR table

Input:  data/preprocessed/images/<name>_clean.pgm, <name>_gaussian.pgm
Output: data/results/reports/sure_curves_<name>.csv, psnr_gaussian.csv
        data/results/signals/<name>_<method>.pgm
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
    IMAGE_NOISE_SIGMA,
    MU_GRID,
    N_FORESTS,
    PSNR_TABLE,
    RESULTS_REPORTS_DIR,
    RESULTS_SIGNALS_DIR,
    SEED,
    SURE_TEMPLATE,
    THREADS,
    image_paths,
)

# ============================================
# OTHER IMPORTS
# ============================================
import time

from rsfsmooth.bench import run_denoise_gaussian, write_sure_curves
from rsfsmooth.graph import load_pgm, save_pgm

RESULTS_REPORTS_DIR.mkdir(parents=True, exist_ok=True)
RESULTS_SIGNALS_DIR.mkdir(parents=True, exist_ok=True)

sigma2 = IMAGE_NOISE_SIGMA ** 2

print("=" * 60)
print("GAUSSIAN DENOISING")
print("=" * 60)
print(f"Noise variance: {sigma2}")
print(f"Mu grid:        {MU_GRID[0]} .. {MU_GRID[-1]}")
print(f"Forests (N):    {N_FORESTS}")

rows = []
total = len(IMAGE_NAMES)

for i, name in enumerate(IMAGE_NAMES, start=1):
    print(f"\n[{i}/{total}] {name}")
    paths = image_paths(name)
    if not paths["gaussian"].exists():
        print(f"  [SKIP] {paths['gaussian'].name} not found, run make_test_images.py first")
        continue

    g, clean = load_pgm(paths["clean"])
    _, noisy = load_pgm(paths["gaussian"])
    print(f"  Grid: {g.shape[0]}x{g.shape[1]} ({g.n} nodes)")

    start = time.perf_counter()
    report = run_denoise_gaussian(g, noisy, sigma2, x=clean, grid=MU_GRID, n_forests=N_FORESTS,
                                  seed=SEED, threads=THREADS)
    print(f"  Tuning and smoothing: {time.perf_counter() - start:.1f} s")

    write_sure_curves(RESULTS_REPORTS_DIR / SURE_TEMPLATE.format(name=name), report)
    for method, values in report.denoised.items():
        save_pgm(RESULTS_SIGNALS_DIR / f"{name}_{method}.pgm", values, g.shape)

    for method, value in report.psnr.items():
        mu = report.best_mu.get(method)
        rows.append((name, method, mu, value))
        mu_text = "-" if mu is None else f"{mu:g}"
        print(f"    {method:<6} mu = {mu_text:<5} PSNR = {value:.2f} dB")

# ============================================
# SAVE PSNR TABLE
# ============================================
with open(PSNR_TABLE, "w") as fh:
    fh.write("image,method,mu,psnr\n")
    for name, method, mu, value in rows:
        fh.write(f"{name},{method},{'' if mu is None else repr(mu)},{value!r}\n")

# ============================================
# SUMMARY
# ============================================
print("\n" + "=" * 60)
print("GAUSSIAN DENOISING COMPLETE")
print("=" * 60)
print(f"PSNR table:   {PSNR_TABLE}")
print(f"SURE curves:  {RESULTS_REPORTS_DIR}")
print(f"Images:       {RESULTS_SIGNALS_DIR}")
print("=" * 60)
