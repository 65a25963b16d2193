"""
Experiment harness: error-vs-runtime benchmark, Gaussian and Poisson
denoising, and node classification accuracy.

run_bench follows a fixed procedure per signal realization:
    1. draw a bandlimited signal x and its noisy version y
    2. pick q on the grid that minimizes ||x - x_hat(q)|| with the exact solver
    3. for every method and iteration parameter, record the approximation
       error ||x* - x_hat|| and the reconstruction error ||x* - x||
    4. time the same configuration in separate runs
Records are averaged over realizations, one record per (method, parameter).
"""

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .baselines import cg_solve, chebyshev_apply, chebyshev_setup
from .errors import DataError, ParameterError, RSFError
from .forest import seed_sequence
from .graph import bandlimited_signal, graph_from_spec
from .smoother import ESTIMATORS, DenseOracle, estimate, exact_smooth
from .tasks import (
    accuracy,
    constant_classifier_accuracy,
    generalized_ssl,
    label_propagate,
    newton_poisson,
    psnr,
    sample_labeled,
    tune_generalized_ssl,
)
from .tuning import DEFAULT_MU_GRID, grid_search, true_risk

logger = logging.getLogger(__name__)

BENCH_GRAPH = "grid:100x100:periodic"
BENCH_METHODS = ("rsf_bar", "rsf_tilde", "cg", "pcg_jacobi", "chebyshev", "chebyshev_gershgorin")
BENCH_HEADER = "graph,method,param,approx_err,recon_err,time_s,pre_s,n_runs"
REFERENCE_HEADER = "graph,exact_time_s,plateau_err,mean_q"
BENCH_Q_GRID = tuple(np.geomspace(1e-3, 10.0, 25).tolist())
SSL_METHODS = ("lp_exact", "lp_rsf", "gssl_exact", "gssl_tilde", "gssl_bar")


# ============================================
# SWEEPS
# ============================================

def log_sweep(lo, hi, count):
    """
    `count` distinct integers between lo and hi, log-spaced.

    Rounding log-spaced points merges neighbours at the low end, so the raw
    point count is raised until exactly `count` distinct values remain (the
    largest such raw count is used).
    """
    lo, hi, count = int(lo), int(hi), int(count)
    if lo < 1 or hi < lo or count < 1:
        raise ParameterError(f"bad log sweep {lo}:{hi}:{count}")
    if count > hi - lo + 1:
        raise ParameterError(f"only {hi - lo + 1} integers lie in {lo}..{hi}, asked for {count}")
    if count == 1:
        return np.array([lo])

    def distinct(points):
        return np.unique(np.rint(np.geomspace(lo, hi, points)).astype(np.int64))

    best = None
    for points in range(count, 10 * (hi - lo + 1) + count):
        values = distinct(points)
        if values.size == count:
            best = values
        elif values.size > count:
            break
    if best is None:
        raise ParameterError(f"no log spacing yields {count} distinct values in {lo}..{hi}")
    return best


def parse_sweep(text):
    """'log:lo:hi:count' or a comma list of positive integers."""
    try:
        if text.startswith("log:"):
            _, lo, hi, count = text.split(":")
            return log_sweep(int(lo), int(hi), int(count))
        values = np.array([int(part) for part in text.split(",") if part])
    except ValueError as exc:
        raise ParameterError(f"bad sweep {text!r}: {exc}") from exc
    if values.size == 0 or (values < 1).any():
        raise ParameterError(f"sweep {text!r} must hold positive integers")
    return values


# ============================================
# ERROR-VS-RUNTIME BENCHMARK
# ============================================

@dataclass
class BenchConfig:
    """Settings of one benchmark run; realizations x methods x sweep cells."""

    graph: str = BENCH_GRAPH
    k: int = 5
    snr: float = 2.0
    methods: tuple = BENCH_METHODS
    sweep: tuple = tuple(log_sweep(1, 100, 17).tolist())
    q_grid: tuple = BENCH_Q_GRID
    realizations: int = 20
    timing_runs: int = 100
    seed: int = 0
    threads: int = 1

    def validate(self):
        unknown = [m for m in self.methods if m not in BENCH_METHODS]
        if unknown:
            raise ParameterError(f"unknown benchmark methods {unknown}; choose from {BENCH_METHODS}")
        if not self.sweep or any(int(p) < 1 for p in self.sweep):
            raise ParameterError("sweep values must be positive integers")
        if self.realizations < 1 or self.timing_runs < 1:
            raise ParameterError("realizations and timing_runs must be >= 1")
        return self


@dataclass(frozen=True)
class BenchRecord:
    graph: str
    method: str
    param: int
    approx_err: float
    recon_err: float
    time_s: float
    pre_s: float
    n_runs: int

    def to_row(self):
        return (
            f"{self.graph},{self.method},{self.param},{self.approx_err!r},"
            f"{self.recon_err!r},{self.time_s!r},{self.pre_s!r},{self.n_runs}"
        )


@dataclass
class BenchReport:
    """Benchmark records plus the exact-solver reference line."""

    config: BenchConfig
    graph: str
    records: list = field(default_factory=list)
    exact_time_s: float = 0.0
    plateau_err: float = 0.0
    tuned_q: list = field(default_factory=list)

    def for_method(self, method):
        return [r for r in self.records if r.method == method]


def _method_runner(method, g, q, y, param, seed, threads):
    """Returns (setup, run): setup() -> state, run(state) -> estimate."""
    if method in ("rsf_bar", "rsf_tilde"):
        which = method.split("_")[1]
        return (lambda: None,
                lambda _: estimate(which, g, q, y, int(param), seed=seed, threads=threads).values)
    if method in ("cg", "pcg_jacobi"):
        precond = "jacobi" if method == "pcg_jacobi" else "none"
        return (lambda: None,
                lambda _: cg_solve(g, q, y, max_iters=int(param), tol=None, precond=precond).x)
    if method in ("chebyshev", "chebyshev_gershgorin"):
        mode = "gershgorin" if method.endswith("gershgorin") else "exact_lambda_max"
        return (lambda: chebyshev_setup(g, q, int(param), b_mode=mode),
                lambda spec: chebyshev_apply(g, spec, y))
    raise ParameterError(f"unknown benchmark method {method!r}")


def _timed(fn, *args):
    start = time.perf_counter()
    out = fn(*args)
    return out, time.perf_counter() - start


def _tune_q_oracle(g, x, y, grid):
    """q on the grid minimizing ||x - x_hat(q)|| with the exact solver."""
    errors = [np.linalg.norm(x - exact_smooth(g, q, y)) for q in grid]
    return float(grid[int(np.argmin(errors))])


def run_bench(cfg):
    """
    Run the benchmark described by cfg.

    Failures inside one (method, parameter) cell are logged and recorded as
    NaN; the rest of the run continues. Timing runs are separate from the
    error runs and use the same seeds.
    """
    cfg.validate()
    signal_root, method_root = np.random.SeedSequence(cfg.seed).spawn(2)
    g = graph_from_spec(cfg.graph, seed=cfg.seed)
    label = f"[mt{cfg.threads}]" if cfg.threads > 1 else ""
    sweep = [int(p) for p in cfg.sweep]
    grid = np.asarray(cfg.q_grid, dtype=float)

    sums = {(m, p): np.zeros(4) for m in cfg.methods for p in sweep}
    failed = set()
    exact_times, plateaus, tuned = [], [], []

    for r, (signal_seed, method_seed) in enumerate(
        zip(signal_root.spawn(cfg.realizations), method_root.spawn(cfg.realizations))
    ):
        x, y, _ = bandlimited_signal(g, cfg.k, cfg.snr, seed=signal_seed)
        q = _tune_q_oracle(g, x, y, grid)
        x_hat, exact_time = _timed(exact_smooth, g, q, y)
        exact_times.append(exact_time)
        plateaus.append(float(np.linalg.norm(x - x_hat)))
        tuned.append(q)
        logger.info("realization %d: q = %g, plateau %.4g", r, q, plateaus[-1])

        cell_seeds = method_seed.spawn(len(cfg.methods) * len(sweep))
        for i, method in enumerate(cfg.methods):
            for j, param in enumerate(sweep):
                cell = (method, param)
                if cell in failed:
                    continue
                seed = cell_seeds[i * len(sweep) + j]
                try:
                    setup, run = _method_runner(method, g, q, y, param, seed, cfg.threads)
                    state, pre_s = _timed(setup)
                    values = run(state)
                    approx = float(np.linalg.norm(values - x_hat))
                    recon = float(np.linalg.norm(values - x))
                    run_time = 0.0
                    for _ in range(cfg.timing_runs):
                        _, elapsed = _timed(run, state)
                        run_time += elapsed
                except (RSFError, ArithmeticError, np.linalg.LinAlgError) as exc:
                    logger.warning("%s at %d failed: %s", method, param, exc)
                    failed.add(cell)
                    continue
                sums[cell] += (approx, recon, run_time / cfg.timing_runs + pre_s, pre_s)

    report = BenchReport(cfg, g.name, exact_time_s=float(np.mean(exact_times)),
                         plateau_err=float(np.mean(plateaus)), tuned_q=tuned)
    for method in cfg.methods:
        for param in sweep:
            cell = (method, param)
            if cell in failed:
                approx = recon = time_s = pre_s = np.nan
            else:
                approx, recon, time_s, pre_s = (sums[cell] / cfg.realizations).tolist()
            report.records.append(BenchRecord(
                g.name, method + label, param, approx, recon, time_s, pre_s,
                cfg.realizations * cfg.timing_runs,
            ))
    return report


def reference_path(path):
    path = Path(path)
    return path.with_name(f"{path.stem}_reference.csv")


def write_bench_csv(path, report):
    """Write the records and, next to them, <stem>_reference.csv."""
    path = Path(path)
    with open(path, "w") as fh:
        fh.write(BENCH_HEADER + "\n")
        for record in report.records:
            fh.write(record.to_row() + "\n")
    with open(reference_path(path), "w") as fh:
        fh.write(REFERENCE_HEADER + "\n")
        fh.write(f"{report.graph},{report.exact_time_s!r},{report.plateau_err!r},"
                 f"{float(np.mean(report.tuned_q))!r}\n")
    return path


def read_bench_csv(path):
    path = Path(path)
    if not path.exists():
        raise DataError("benchmark CSV not found", path)
    records = []
    with open(path) as fh:
        header = fh.readline().strip()
        if header != BENCH_HEADER:
            raise DataError(f"unexpected header {header!r}", path, 1)
        for number, line in enumerate(fh, start=2):
            parts = line.strip().split(",")
            if len(parts) != 8:
                raise DataError(f"expected 8 columns, got {len(parts)}", path, number)
            graph, method, param, *numbers, n_runs = parts
            try:
                records.append(BenchRecord(graph, method, int(param),
                                           *(float(v) for v in numbers), int(n_runs)))
            except ValueError as exc:
                raise DataError(str(exc), path, number) from exc
    return records


def plot_bench(records, path, plateau_err=None, exact_time_s=None):
    """
    Log-log approximation and reconstruction error against run time, one
    line per method. Format follows the file suffix (.svg, .png).
    """
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    methods = list(dict.fromkeys(r.method for r in records))
    fig, axes = plt.subplots(1, 2, figsize=(12, 5))
    for method in methods:
        rows = [r for r in records if r.method == method and np.isfinite(r.time_s)]
        if not rows:
            continue
        times = [r.time_s for r in rows]
        axes[0].loglog(times, [r.approx_err for r in rows], marker="o", ms=3, label=method)
        axes[1].loglog(times, [r.recon_err for r in rows], marker="o", ms=3, label=method)

    if plateau_err is not None:
        axes[1].axhline(plateau_err, color="red", linewidth=1, label="||x - x_hat||")
    if exact_time_s is not None:
        for ax in axes:
            ax.axvline(exact_time_s, color="gray", linestyle="--", linewidth=1, label="exact solve")

    axes[0].set_title("Approximation error")
    axes[1].set_title("Reconstruction error")
    for ax in axes:
        ax.set_xlabel("time (s)")
        ax.set_ylabel("error")
        ax.grid(True, which="both", alpha=0.3)
    axes[1].legend(fontsize=8)
    plt.tight_layout()
    plt.savefig(path, dpi=300, bbox_inches="tight")
    plt.close(fig)
    return path


# ============================================
# GAUSSIAN DENOISING
# ============================================

@dataclass
class DenoiseReport:
    """SURE curves, selected mu, denoised signals and PSNR per method."""

    grid: np.ndarray
    sure: dict = field(default_factory=dict)
    best_mu: dict = field(default_factory=dict)
    denoised: dict = field(default_factory=dict)
    psnr: dict = field(default_factory=dict)
    risk: np.ndarray | None = None


def run_denoise_gaussian(g, y, sigma2, x=None, grid=DEFAULT_MU_GRID, n_forests=20, seed=None,
                         threads=1, estimators=ESTIMATORS, peak=1.0):
    """
    Tune mu by SURE separately for the exact smoother and each forest
    estimator, then smooth with the chosen mu. PSNR is reported when the
    clean signal x is given, including the noisy input itself.
    """
    grid = np.asarray(grid, dtype=float)
    report = DenoiseReport(grid=grid)
    children = seed_sequence(seed).spawn(len(estimators))

    exact = grid_search(g, y, grid, "sure_exact", sigma2=sigma2)
    report.sure["exact"] = exact.scores
    report.best_mu["exact"] = exact.best
    report.denoised["exact"] = exact.best_values

    for which, child in zip(estimators, children):
        result = grid_search(g, y, grid, "sure_rsf", sigma2=sigma2, which=which,
                             n_forests=n_forests, seed=child, threads=threads)
        report.sure[which] = result.scores
        report.best_mu[which] = result.best
        report.denoised[which] = result.best_values
        logger.info("%s: mu = %g", which, result.best)

    if x is not None:
        report.psnr["noisy"] = psnr(y, x, peak)
        for method, values in report.denoised.items():
            report.psnr[method] = psnr(values, x, peak)
        report.risk = np.array([true_risk(DenseOracle.build(g, mu), x, sigma2) for mu in grid])
    return report


def write_sure_curves(path, report):
    """Header mu,sure_<method>...[,true_risk]."""
    methods = list(report.sure)
    columns = ["mu"] + [f"sure_{m}" for m in methods]
    if report.risk is not None:
        columns.append("true_risk")
    with open(path, "w") as fh:
        fh.write(",".join(columns) + "\n")
        for i, mu in enumerate(report.grid.tolist()):
            row = [repr(mu)] + [repr(float(report.sure[m][i])) for m in methods]
            if report.risk is not None:
                row.append(repr(float(report.risk[i])))
            fh.write(",".join(row) + "\n")
    return path


def write_psnr_table(path, report):
    """Header method,mu,psnr; the noisy input has an empty mu."""
    with open(path, "w") as fh:
        fh.write("method,mu,psnr\n")
        for method, value in report.psnr.items():
            mu = report.best_mu.get(method)
            fh.write(f"{method},{'' if mu is None else repr(mu)},{value!r}\n")
    return path


# ============================================
# POISSON DENOISING
# ============================================

@dataclass
class PoissonReport:
    """Newton loss traces and intensity estimates for the exact and bar updates."""

    mu: float
    traces: dict = field(default_factory=dict)
    intensity: dict = field(default_factory=dict)
    psnr: dict = field(default_factory=dict)


def run_denoise_poisson(g, counts, mu, intensity=None, n_forests=20, seed=None, threads=1,
                        max_iters=30):
    """
    Newton's method with exact and forest (bar) steps from the same start.
    PSNR is measured against the clean intensity, with its maximum as peak.
    """
    report = PoissonReport(mu=float(mu))
    for method in ("exact", "bar"):
        t, trace = newton_poisson(g, counts, mu, method=method, n_forests=n_forests, seed=seed,
                                  threads=threads, max_iters=max_iters)
        report.traces[method] = trace
        report.intensity[method] = np.exp(t)
        logger.info("%s Newton: %d iterations, final loss %.8g",
                    method, len(trace.losses), trace.final_loss)
    if intensity is not None:
        peak = float(np.max(intensity))
        report.psnr["noisy"] = psnr(counts, intensity, peak)
        for method, values in report.intensity.items():
            report.psnr[method] = psnr(values, intensity, peak)
    return report


def write_poisson_traces(path, report):
    """Header method,iter,loss,alpha,update_norm (iteration 0 is the start)."""
    with open(path, "w") as fh:
        fh.write("method,iter,loss,alpha,update_norm\n")
        for method, trace in report.traces.items():
            fh.write(f"{method},0,{trace.initial_loss!r},0.0,0.0\n")
            for k, (loss, alpha, norm) in enumerate(
                zip(trace.losses, trace.alphas, trace.update_norms), start=1
            ):
                fh.write(f"{method},{k},{loss!r},{alpha!r},{norm!r}\n")
    return path


# ============================================
# NODE CLASSIFICATION
# ============================================

@dataclass(frozen=True)
class SSLRecord:
    method: str
    m: int
    accuracy_mean: float
    accuracy_std: float
    repetitions: int


def _classify(method, g, problem, grid, eta, n_forests, seed, threads):
    if method == "lp_exact":
        return label_propagate(g, problem, "exact")
    if method == "lp_rsf":
        return label_propagate(g, problem, "rsf", n_forests=n_forests, seed=seed, threads=threads)
    which = method.split("_")[1]
    tuning_seed, fit_seed = seed.spawn(2)
    tuned = tune_generalized_ssl(g, problem, grid, eta=eta, method=which,
                                 n_forests=n_forests, seed=tuning_seed, threads=threads)
    return generalized_ssl(g, problem, tuned.best, eta=eta, method=which,
                           n_forests=n_forests, seed=fit_seed, threads=threads)


def run_ssl(g, ground_truth, m_values, n_forests=20, repetitions=50, seed=None,
            grid=DEFAULT_MU_GRID, eta=0.0, methods=SSL_METHODS, threads=1):
    """
    Accuracy on the unlabeled nodes averaged over random label sets.

    For every m, each repetition draws m labeled nodes per class; all methods
    see the same label sets. gSSL methods tune mu by LOOCV on the labeled
    nodes, each with its own estimator. A "constant" row gives the accuracy
    of predicting the majority class.
    """
    unknown = [m for m in methods if m not in SSL_METHODS]
    if unknown:
        raise ParameterError(f"unknown SSL methods {unknown}; choose from {SSL_METHODS}")
    ground_truth = np.asarray(ground_truth, dtype=np.int64)
    records = []
    for m, m_seed in zip(m_values, seed_sequence(seed).spawn(len(m_values))):
        scores = {method: [] for method in (*methods, "constant")}
        for rep_seed in m_seed.spawn(repetitions):
            label_seed, *method_seeds = rep_seed.spawn(len(methods) + 1)
            problem = sample_labeled(ground_truth, int(m), seed=label_seed)
            scores["constant"].append(constant_classifier_accuracy(ground_truth, problem.nodes))
            for method, method_seed in zip(methods, method_seeds):
                result = _classify(method, g, problem, grid, eta, n_forests, method_seed, threads)
                scores[method].append(accuracy(result, ground_truth))
        for method, values in scores.items():
            records.append(SSLRecord(method, int(m), float(np.mean(values)),
                                     float(np.std(values)), repetitions))
        logger.info("m = %d: %s", m, ", ".join(
            f"{r.method} {r.accuracy_mean:.3f}" for r in records if r.m == m))
    return records


def write_ssl_table(path, records):
    with open(path, "w") as fh:
        fh.write("method,m,accuracy_mean,accuracy_std,repetitions\n")
        for r in records:
            fh.write(f"{r.method},{r.m},{r.accuracy_mean!r},{r.accuracy_std!r},{r.repetitions}\n")
    return path
