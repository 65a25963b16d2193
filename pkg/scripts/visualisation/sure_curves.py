"""
Plot SURE curves against the true risk

Input:  data/results/reports/sure_curves_<name>.csv (denoise_gaussian.py)
Output: data/results/figures/sure_curves.png
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
from config import IMAGE_NAMES, RESULTS_FIGURES_DIR, RESULTS_REPORTS_DIR, SURE_TEMPLATE

# ============================================
# OTHER IMPORTS
# ============================================
import matplotlib.pyplot as plt
import numpy as np

SURE_PLOT = RESULTS_FIGURES_DIR / "sure_curves.png"
RESULTS_FIGURES_DIR.mkdir(parents=True, exist_ok=True)

STYLES = {
    "sure_exact": dict(color="black", linewidth=2, label="SURE (exact)"),
    "sure_tilde": dict(color="tab:orange", marker="o", ms=3, label="SURE (tilde)"),
    "sure_bar": dict(color="tab:blue", marker="s", ms=3, label="SURE (bar)"),
    "true_risk": dict(color="red", linestyle="--", label="true risk"),
}

names = [n for n in IMAGE_NAMES if (RESULTS_REPORTS_DIR / SURE_TEMPLATE.format(name=n)).exists()]
if not names:
    print("No SURE curves found, run denoise_gaussian.py first")
    sys.exit(1)

print("Plotting SURE curves...")
fig, axes = plt.subplots(1, len(names), figsize=(6 * len(names), 4.5), squeeze=False)

for ax, name in zip(axes[0], names):
    table = np.genfromtxt(RESULTS_REPORTS_DIR / SURE_TEMPLATE.format(name=name),
                          delimiter=",", names=True)
    for column in table.dtype.names[1:]:
        ax.plot(table["mu"], table[column], **STYLES.get(column, dict(label=column)))
        best = table["mu"][np.nanargmin(table[column])]
        print(f"  {name}: {column} minimum at mu = {best:g}")
    ax.set_title(name)
    ax.set_xlabel("mu")
    ax.set_ylabel("estimated risk")
    ax.grid(True, linestyle="--", alpha=0.3)
    ax.legend()

plt.tight_layout()

# ============================================
# SAVE AND SHOW PLOT
# ============================================
print(f"Saving plot to {SURE_PLOT}...")
plt.savefig(SURE_PLOT, dpi=300, bbox_inches="tight")
print("Plot saved successfully!")

plt.show()
