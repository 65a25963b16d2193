"""
Newton loss traces for Poisson denoising, exact against forest steps

Input:  data/results/reports/newton_trace_<name>.csv (denoise_poisson.py)
Output: data/results/figures/newton_traces.png
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
from config import IMAGE_NAMES, RESULTS_FIGURES_DIR, RESULTS_REPORTS_DIR, TRACE_TEMPLATE

# ============================================
# OTHER IMPORTS
# ============================================
import matplotlib.pyplot as plt
import numpy as np

TRACE_PLOT = RESULTS_FIGURES_DIR / "newton_traces.png"
RESULTS_FIGURES_DIR.mkdir(parents=True, exist_ok=True)

names = [n for n in IMAGE_NAMES if (RESULTS_REPORTS_DIR / TRACE_TEMPLATE.format(name=n)).exists()]
if not names:
    print("No Newton traces found, run denoise_poisson.py first")
    sys.exit(1)

print("Plotting Newton loss traces...")
fig, axes = plt.subplots(1, len(names), figsize=(6 * len(names), 4.5), squeeze=False)

for ax, name in zip(axes[0], names):
    # method,iter,loss,alpha,update_norm
    rows = [line.split(",") for line in
            (RESULTS_REPORTS_DIR / TRACE_TEMPLATE.format(name=name)).read_text().splitlines()[1:]]
    losses = {}
    for method, iteration, loss, *_ in rows:
        losses.setdefault(method, []).append((int(iteration), float(loss)))

    # Distance to the best loss seen, so both traces share a log axis
    floor = min(loss for trace in losses.values() for _, loss in trace)
    for method, trace in losses.items():
        iterations, values = np.array(trace).T
        gap = np.maximum(values - floor, 1e-16)
        ax.semilogy(iterations, gap, marker="o", ms=3, label=method)
        print(f"  {name}: {method} {len(trace) - 1} iterations, final loss {values[-1]:.6g}")

    ax.set_title(name)
    ax.set_xlabel("Newton iteration")
    ax.set_ylabel("loss - best loss")
    ax.grid(True, which="both", linestyle="--", alpha=0.3)
    ax.legend()

plt.tight_layout()

# ============================================
# SAVE AND SHOW PLOT
# ============================================
print(f"Saving plot to {TRACE_PLOT}...")
plt.savefig(TRACE_PLOT, dpi=300, bbox_inches="tight")
print("Plot saved successfully!")

plt.show()
