"""
Node classification on the citation networks

This script:
1. Loads the preprocessed citation graphs (prepare_citation_graph.py)
2. For every m in SSL_M_VALUES draws SSL_REPETITIONS random label sets with
   m labeled nodes per class
3. Classifies the rest with label propagation (exact, forests) and
   generalized SSL (exact, tilde, bar) with mu tuned by LOOCV
4. Writes mean and standard deviation of the accuracy per method and m

Input:  data/preprocessed/citation/<name>_edges.txt, <name>_labels.txt
Output: data/results/reports/ssl_accuracy_<name>.csv
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
    CITATION_DATASETS,
    MU_GRID,
    RESULTS_REPORTS_DIR,
    SEED,
    SSL_ETA,
    SSL_M_VALUES,
    SSL_N_FORESTS,
    SSL_REPETITIONS,
    SSL_TABLE_TEMPLATE,
    THREADS,
    citation_paths,
)

# ============================================
# OTHER IMPORTS
# ============================================
import time

from rsfsmooth.bench import run_ssl, write_ssl_table
from rsfsmooth.graph import load_edge_list, load_labels

RESULTS_REPORTS_DIR.mkdir(parents=True, exist_ok=True)

print("=" * 60)
print("NODE CLASSIFICATION")
print("=" * 60)
print(f"Labels per class: {SSL_M_VALUES}")
print(f"Repetitions:      {SSL_REPETITIONS}")
print(f"Forests (N):      {SSL_N_FORESTS}")
print(f"eta:              {SSL_ETA}")

written = []
total = len(CITATION_DATASETS)

for i, name in enumerate(CITATION_DATASETS, start=1):
    print(f"\n[{i}/{total}] {name}")
    paths = citation_paths(name)
    if not paths["edges"].exists():
        print("  [SKIP] not preprocessed, run prepare_citation_graph.py first")
        continue

    g = load_edge_list(paths["edges"])
    truth = load_labels(paths["labels"], g.n)
    print(f"  Graph: {g.n} nodes, {g.n_edges} edges, {truth.max() + 1} classes")

    start = time.perf_counter()
    records = run_ssl(g, truth, SSL_M_VALUES, n_forests=SSL_N_FORESTS,
                      repetitions=SSL_REPETITIONS, seed=SEED, grid=MU_GRID, eta=SSL_ETA,
                      threads=THREADS)
    print(f"  Done in {time.perf_counter() - start:.1f} s")

    for r in records:
        print(f"    m={r.m:<3} {r.method:<11} {r.accuracy_mean:.3f} +- {r.accuracy_std:.3f}")

    out = RESULTS_REPORTS_DIR / SSL_TABLE_TEMPLATE.format(name=name)
    write_ssl_table(out, records)
    written.append(out)

# ============================================
# SUMMARY
# ============================================
print("\n" + "=" * 60)
print("NODE CLASSIFICATION COMPLETE")
print("=" * 60)
for path in written:
    print(f"Saved: {path}")
if not written:
    print("No citation graph found")
print("=" * 60)
