"""
Generate the synthetic test images for the denoising experiments

This script:
1. Draws two smooth images (Gaussian blobs, interfering waves) on an
   IMAGE_SIZE x IMAGE_SIZE grid, scaled to [0.05, 0.95]
2. Adds Gaussian noise with standard deviation IMAGE_NOISE_SIGMA
3. Scales the clean image to POISSON_PEAK and draws Poisson counts

Input:  none (fully synthetic, seeded with SEED)
Output: data/preprocessed/images/<name>_clean.pgm, _gaussian.pgm,
        _intensity.csv, _counts.csv
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
    IMAGES_DIR,           # Output folder for test images
    IMAGE_NAMES,          # Images to generate
    IMAGE_SIZE,           # Side length in pixels
    IMAGE_NOISE_SIGMA,    # Gaussian noise level
    POISSON_PEAK,         # Peak intensity of the Poisson images
    SEED,
    image_paths,
)

# ============================================
# OTHER IMPORTS
# ============================================
import numpy as np

from rsfsmooth.graph import save_pgm, save_signal_csv

IMAGES_DIR.mkdir(parents=True, exist_ok=True)


def blobs(size, rng):
    """Sum of a few Gaussian bumps with random centres and widths."""
    r, c = np.mgrid[0:size, 0:size] / size
    image = np.zeros((size, size))
    for _ in range(5):
        cr, cc = rng.uniform(0.15, 0.85, 2)
        width = rng.uniform(0.08, 0.2)
        image += rng.uniform(0.5, 1.0) * np.exp(-((r - cr) ** 2 + (c - cc) ** 2) / (2 * width ** 2))
    return image


def waves(size, rng):
    """Two plane waves plus a step edge."""
    r, c = np.mgrid[0:size, 0:size] / size
    angle = rng.uniform(0.0, np.pi)
    image = np.sin(6 * np.pi * (r * np.cos(angle) + c * np.sin(angle)))
    image += 0.5 * np.cos(3 * np.pi * r)
    image += 1.5 * (c > 0.6)
    return image


GENERATORS = {"blobs": blobs, "waves": waves}


def rescale(image, lo=0.05, hi=0.95):
    image = image - image.min()
    return lo + (hi - lo) * image / image.max()


print("=" * 60)
print("TEST IMAGE GENERATION")
print("=" * 60)
print(f"Size:        {IMAGE_SIZE}x{IMAGE_SIZE}")
print(f"Noise sigma: {IMAGE_NOISE_SIGMA}")
print(f"Peak counts: {POISSON_PEAK}")

rng = np.random.default_rng(SEED)
total = len(IMAGE_NAMES)

for i, name in enumerate(IMAGE_NAMES, start=1):
    print(f"\n[{i}/{total}] {name}")
    paths = image_paths(name)
    shape = (IMAGE_SIZE, IMAGE_SIZE)

    clean = rescale(GENERATORS[name](IMAGE_SIZE, rng)).ravel()
    noisy = clean + rng.normal(0.0, IMAGE_NOISE_SIGMA, clean.size)
    clipped = np.mean((noisy < 0.0) | (noisy > 1.0))

    save_pgm(paths["clean"], clean, shape)
    save_pgm(paths["gaussian"], noisy, shape)
    print(f"  [OK] {paths['clean'].name}, {paths['gaussian'].name} "
          f"({100 * clipped:.2f}% of noisy pixels clipped)")

    intensity = POISSON_PEAK * clean
    counts = rng.poisson(intensity).astype(float)
    save_signal_csv(paths["intensity"], intensity)
    save_signal_csv(paths["counts"], counts)
    print(f"  [OK] {paths['counts'].name} (mean count {counts.mean():.2f})")

# ============================================
# SUMMARY
# ============================================
print("\n" + "=" * 60)
print("TEST IMAGE GENERATION COMPLETE")
print("=" * 60)
print(f"Images: {', '.join(IMAGE_NAMES)}")
print(f"Output: {IMAGES_DIR}")
print("=" * 60)
