"""
Side-by-side view of the clean, noisy and denoised test images

Input:  data/preprocessed/images/<name>_clean.pgm, <name>_gaussian.pgm
        data/results/signals/<name>_<method>.pgm (denoise_gaussian.py)
        data/results/reports/psnr_gaussian.csv
Output: data/results/figures/denoised_images.png
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
from config import IMAGE_NAMES, PSNR_TABLE, RESULTS_FIGURES_DIR, RESULTS_SIGNALS_DIR, image_paths

# ============================================
# OTHER IMPORTS
# ============================================
import matplotlib.pyplot as plt

from rsfsmooth.graph import load_pgm

DENOISED_PLOT = RESULTS_FIGURES_DIR / "denoised_images.png"
RESULTS_FIGURES_DIR.mkdir(parents=True, exist_ok=True)

METHODS = ("exact", "tilde", "bar")

# image,method,mu,psnr
psnr = {}
if PSNR_TABLE.exists():
    for line in PSNR_TABLE.read_text().splitlines()[1:]:
        name, method, _, value = line.split(",")
        psnr[(name, method)] = float(value)

names = [n for n in IMAGE_NAMES if (RESULTS_SIGNALS_DIR / f"{n}_exact.pgm").exists()]
if not names:
    print("No denoised images found, run denoise_gaussian.py first")
    sys.exit(1)

print("Plotting denoised images...")
columns = ("clean", "noisy") + METHODS
fig, axes = plt.subplots(len(names), len(columns), figsize=(3 * len(columns), 3 * len(names)),
                         squeeze=False)

for row, name in zip(axes, names):
    paths = image_paths(name)
    files = {
        "clean": paths["clean"],
        "noisy": paths["gaussian"],
        **{m: RESULTS_SIGNALS_DIR / f"{name}_{m}.pgm" for m in METHODS},
    }
    for ax, column in zip(row, columns):
        g, values = load_pgm(files[column])
        ax.imshow(values.reshape(g.shape), cmap="gray", vmin=0.0, vmax=1.0)
        title = f"{name}: {column}"
        if (name, column) in psnr:
            title += f"\n{psnr[(name, column)]:.2f} dB"
        ax.set_title(title, fontsize=10)
        ax.axis("off")

plt.tight_layout()

# ============================================
# SAVE AND SHOW PLOT
# ============================================
print(f"Saving plot to {DENOISED_PLOT}...")
plt.savefig(DENOISED_PLOT, dpi=300, bbox_inches="tight")
print("Plot saved successfully!")

plt.show()
