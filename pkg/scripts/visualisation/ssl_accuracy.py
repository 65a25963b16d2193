"""
Node classification accuracy against the number of labels per class

Input:  data/results/reports/ssl_accuracy_<name>.csv (node_classification.py)
Output: data/results/figures/ssl_accuracy_<name>.png
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
from config import CITATION_DATASETS, RESULTS_FIGURES_DIR, RESULTS_REPORTS_DIR, SSL_TABLE_TEMPLATE

# ============================================
# OTHER IMPORTS
# ============================================
import matplotlib.pyplot as plt

RESULTS_FIGURES_DIR.mkdir(parents=True, exist_ok=True)

tables = {name: RESULTS_REPORTS_DIR / SSL_TABLE_TEMPLATE.format(name=name)
          for name in CITATION_DATASETS}
tables = {name: path for name, path in tables.items() if path.exists()}
if not tables:
    print("No accuracy tables found, run node_classification.py first")
    sys.exit(1)

for name, path in tables.items():
    print(f"Plotting {name}...")
    # method,m,accuracy_mean,accuracy_std,repetitions
    series = {}
    for line in path.read_text().splitlines()[1:]:
        method, m, mean, std, _ = line.split(",")
        series.setdefault(method, []).append((int(m), float(mean), float(std)))

    fig, ax = plt.subplots(figsize=(7, 5))
    for method, points in series.items():
        points.sort()
        ms = [p[0] for p in points]
        means = [p[1] for p in points]
        stds = [p[2] for p in points]
        style = dict(color="gray", linestyle=":") if method == "constant" else dict(marker="o")
        ax.errorbar(ms, means, yerr=stds, capsize=3, label=method, **style)

    ax.set_xscale("log")
    ax.set_xlabel("labeled nodes per class")
    ax.set_ylabel("accuracy")
    ax.set_title(f"Node classification: {name}")
    ax.grid(True, linestyle="--", alpha=0.3)
    ax.legend(fontsize=8)
    plt.tight_layout()

    out = RESULTS_FIGURES_DIR / f"ssl_accuracy_{name}.png"
    print(f"Saving plot to {out}...")
    plt.savefig(out, dpi=300, bbox_inches="tight")
    print("Plot saved successfully!")

plt.show()
