"""
Convert the linqs citation networks into edge lists and label files

This script:
1. Reads <name>.cites and <name>.content for every dataset in CITATION_DATASETS
2. Builds the undirected citation graph (mutual citations count once)
3. Keeps the largest connected component
4. Writes the edge list, the class of every node, the index map and class names
5. Checks node and edge counts against CITATION_EXPECTED

Input:  data/raw/<name>/<name>.cites, <name>.content
Output: data/preprocessed/citation/<name>_edges.txt, _labels.txt,
        _index_map.csv, _classes.txt
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
    CITATION_DATASETS,    # Raw .cites / .content paths per dataset
    CITATION_EXPECTED,    # Known (nodes, edges) of the largest component
    citation_paths,       # Output paths per dataset
)

# ============================================
# OTHER IMPORTS
# ============================================
import numpy as np

from rsfsmooth.graph import (
    largest_component,
    load_linqs,
    save_edge_list,
    save_index_map,
    save_labels,
)

print("=" * 60)
print("CITATION GRAPH PREPARATION")
print("=" * 60)

converted = []
missing = []
total = len(CITATION_DATASETS)

for i, (name, raw) in enumerate(CITATION_DATASETS.items(), start=1):
    print(f"\n[{i}/{total}] {name}")

    if not raw["cites"].exists() or not raw["content"].exists():
        print(f"  [SKIP] raw files not found in {raw['cites'].parent}")
        missing.append(name)
        continue

    # ============================================
    # LOAD AND RESTRICT TO LARGEST COMPONENT
    # ============================================
    g_full, labels_full, class_names, paper_ids = load_linqs(raw["cites"], raw["content"], name)
    print(f"  Papers: {g_full.n}, citation edges: {g_full.n_edges}")

    g, index_map = largest_component(g_full)
    labels = labels_full[index_map]
    print(f"  Largest component: {g.n} nodes, {g.n_edges} edges")

    # ============================================
    # SAVE
    # ============================================
    out = citation_paths(name)
    out["edges"].parent.mkdir(parents=True, exist_ok=True)
    save_edge_list(g, out["edges"])
    save_labels(out["labels"], labels)
    save_index_map(out["index_map"], index_map)
    out["classes"].write_text("\n".join(class_names) + "\n")

    sizes = np.bincount(labels, minlength=len(class_names))
    for c, count in enumerate(sizes.tolist()):
        print(f"    class {c} ({class_names[c]}): {count} nodes")
    print(f"  [OK] Saved: {out['edges'].name}, {out['labels'].name}")

    # ============================================
    # VERIFY
    # ============================================
    expected = CITATION_EXPECTED.get(name)
    if expected is not None:
        if (g.n, g.n_edges) == expected:
            print(f"  [OK] Matches expected size {expected}")
        else:
            print(f"  [WARNING] Expected {expected}, got {(g.n, g.n_edges)}")
    converted.append((name, g.n, g.n_edges, len(class_names)))

# ============================================
# SUMMARY
# ============================================
print("\n" + "=" * 60)
print("CITATION GRAPH PREPARATION COMPLETE")
print("=" * 60)
for name, n, m, c in converted:
    print(f"{name:<10} {n:>6} nodes  {m:>6} edges  {c} classes")
if missing:
    print(f"Skipped (no raw data): {', '.join(missing)}")
print("=" * 60)
