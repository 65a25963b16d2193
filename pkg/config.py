"""
Project Configuration
Defines all paths and experiment settings for the random-forest smoothing
experiments (denoising, node classification, runtime benchmark).

HOW TO USE THIS FILE:
---------------------
1. Import what you need in your scripts:

   from config import MU_GRID, N_FORESTS, RESULTS_REPORTS_DIR

2. Or import everything:

   import config
   # Then use: config.MU_GRID

3. Run this file directly to check your setup:

   python config.py
"""

from pathlib import Path

# ============================================
# PROJECT ROOT DIRECTORY
# ============================================
# Every path below hangs off the folder holding this file, so scripts work
# no matter where they are started from
PROJECT_ROOT = Path(__file__).parent.resolve()

# ============================================
# DATA DIRECTORIES
# ============================================
DATA_DIR = PROJECT_ROOT / "data"
RAW_DATA_DIR = DATA_DIR / "raw"                # Downloaded datasets, never modified
PREPROCESSED_DIR = DATA_DIR / "preprocessed"   # Edge lists, label files, test images
RESULTS_DIR = DATA_DIR / "results"             # Everything the experiments produce

RESULTS_FIGURES_DIR = RESULTS_DIR / "figures"   # PNG / SVG plots
RESULTS_REPORTS_DIR = RESULTS_DIR / "reports"   # CSV tables and traces
RESULTS_SIGNALS_DIR = RESULTS_DIR / "signals"   # Denoised images and signals

# ============================================
# SCRIPT DIRECTORIES
# ============================================
SCRIPTS_DIR = PROJECT_ROOT / "scripts"
PREPROCESSING_DIR = SCRIPTS_DIR / "preprocessing"  # Dataset conversion, test images
ANALYSIS_DIR = SCRIPTS_DIR / "analysis"            # Experiments writing CSV reports
VISUALISATION_DIR = SCRIPTS_DIR / "visualisation"  # Figures from the reports

# ============================================
# RAW INPUT DATA - CITATION NETWORKS
# ============================================
# linqs format: <name>.cites holds "cited citing" pairs, <name>.content holds
# "paper features... class" rows. Only the ids and the class column are used.
CITATION_DATASETS = {
    "cora": {
        "cites": RAW_DATA_DIR / "cora" / "cora.cites",
        "content": RAW_DATA_DIR / "cora" / "cora.content",
    },
    "citeseer": {
        "cites": RAW_DATA_DIR / "citeseer" / "citeseer.cites",
        "content": RAW_DATA_DIR / "citeseer" / "citeseer.content",
    },
}

# Node and edge counts of the largest component, checked after conversion
CITATION_EXPECTED = {
    "cora": (2485, 5069),
}


def citation_paths(name):
    """Preprocessed edge list, label file and index map of one citation network."""
    base = PREPROCESSED_DIR / "citation"
    return {
        "edges": base / f"{name}_edges.txt",
        "labels": base / f"{name}_labels.txt",
        "index_map": base / f"{name}_index_map.csv",
        "classes": base / f"{name}_classes.txt",
    }


# ============================================
# TEST IMAGES
# ============================================
# Synthetic smooth images on an IMAGE_SIZE x IMAGE_SIZE pixel grid
IMAGES_DIR = PREPROCESSED_DIR / "images"
IMAGE_NAMES = ("blobs", "waves")
IMAGE_SIZE = 48

# Gaussian noise standard deviation on the [0, 1] intensity scale
IMAGE_NOISE_SIGMA = 0.1

# Poisson images: clean intensities are scaled to this peak photon count
POISSON_PEAK = 20.0


def image_paths(name):
    """Clean, Gaussian-noisy and Poisson count versions of one test image."""
    return {
        "clean": IMAGES_DIR / f"{name}_clean.pgm",
        "gaussian": IMAGES_DIR / f"{name}_gaussian.pgm",
        "intensity": IMAGES_DIR / f"{name}_intensity.csv",
        "counts": IMAGES_DIR / f"{name}_counts.csv",
    }


# ============================================
# EXPERIMENT SETTINGS
# ============================================
SEED = 0
THREADS = 1

# Candidate regularization strengths for SURE / LOOCV tuning
MU_GRID = tuple(0.5 * k for k in range(1, 11))   # 0.5, 1.0, ..., 5.0

# Forests per smoothing call in the denoising experiments
N_FORESTS = 20

# Poisson denoising: data weight and Newton iteration cap
POISSON_MU = 1.0
POISSON_MAX_ITERS = 30

# Node classification
SSL_M_VALUES = (1, 2, 5, 10, 20)   # labeled nodes per class
SSL_REPETITIONS = 10               # random label sets per m
SSL_N_FORESTS = 50
SSL_ETA = 0.0                      # 0 = PageRank-style normalization

# Runtime benchmark
BENCH_GRAPHS = (
    "grid:100x100:periodic",
    "er:n=10000,deg=10",
    "ba:n=10000,m=5",
    "kreg:n=10000,k=10",
    "knn:n=10000,k=20,dim=3",
)
BENCH_K = 5                       # bandlimit of the planted signal
BENCH_SNR = 2.0
BENCH_SWEEP = "log:1:100:17"      # forests / iterations / polynomial degree
BENCH_REALIZATIONS = 20
BENCH_TIMING_RUNS = 100

# ============================================
# OUTPUT FILES
# ============================================
PSNR_TABLE = RESULTS_REPORTS_DIR / "psnr_gaussian.csv"
POISSON_TABLE = RESULTS_REPORTS_DIR / "psnr_poisson.csv"
SSL_TABLE_TEMPLATE = "ssl_accuracy_{name}.csv"
BENCH_TEMPLATE = "bench_{name}.csv"
SURE_TEMPLATE = "sure_curves_{name}.csv"
TRACE_TEMPLATE = "newton_trace_{name}.csv"

# ============================================
# HELPER FUNCTIONS
# ============================================

def setup_directories():
    """
    Create all project directories if they don't exist.

    Usage:
        from config import setup_directories
        setup_directories()
    """
    directories = [
        DATA_DIR,
        RAW_DATA_DIR,
        PREPROCESSED_DIR,
        PREPROCESSED_DIR / "citation",
        IMAGES_DIR,
        RESULTS_DIR,
        RESULTS_FIGURES_DIR,
        RESULTS_REPORTS_DIR,
        RESULTS_SIGNALS_DIR,
        SCRIPTS_DIR,
        PREPROCESSING_DIR,
        ANALYSIS_DIR,
        VISUALISATION_DIR,
    ]
    for directory in directories:
        directory.mkdir(parents=True, exist_ok=True)

    print("All directories created/verified")


def check_raw_data():
    """
    Check which citation datasets are present.

    The image and benchmark experiments need no downloads; only node
    classification reads raw files. Returns True if every dataset is found.
    """
    print("\n" + "=" * 60)
    print("RAW DATA CHECK")
    print("=" * 60)

    all_found = True
    print("\nCitation networks:")
    for name, files in CITATION_DATASETS.items():
        for kind, path in files.items():
            if path.exists():
                print(f"  [OK] {name} {kind}: {path.name}")
            else:
                print(f"  [MISSING] {name} {kind}: {path}")
                all_found = False

    print("\n" + "=" * 60)
    if all_found:
        print("All raw data files found!")
    else:
        print("WARNING: Some files are missing (node classification will skip them)")
    print("=" * 60)

    return all_found


def print_config():
    """Print a summary of the current configuration."""
    print("\n" + "=" * 60)
    print("PROJECT CONFIGURATION")
    print("=" * 60)
    print(f"Project Root:     {PROJECT_ROOT}")
    print(f"Raw Data Dir:     {RAW_DATA_DIR}")
    print(f"Preprocessed Dir: {PREPROCESSED_DIR}")
    print(f"Results Dir:      {RESULTS_DIR}")
    print(f"\nMu grid:          {MU_GRID[0]} .. {MU_GRID[-1]} ({len(MU_GRID)} values)")
    print(f"Forests (N):      {N_FORESTS}")
    print(f"Images:           {', '.join(IMAGE_NAMES)} ({IMAGE_SIZE}x{IMAGE_SIZE})")
    print(f"SSL labels/class: {SSL_M_VALUES}")
    print(f"Bench sweep:      {BENCH_SWEEP}, k={BENCH_K}, SNR={BENCH_SNR}")
    print("=" * 60 + "\n")


# ============================================
# RUN WHEN EXECUTED DIRECTLY
# ============================================
if __name__ == "__main__":
    print_config()
    setup_directories()
    check_raw_data()
