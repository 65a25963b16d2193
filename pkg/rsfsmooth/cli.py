"""
Command-line entry point.

    python -m rsfsmooth smooth --graph grid:100x100 --q 2.0 --estimator bar --forests 20 --seed 7
    python -m rsfsmooth tune --method sure --sigma2 0.04 --grid 0.5:0.5:5.0
    python -m rsfsmooth bench --sweep log:1:100:17 --plot bench.svg

Every flag defaults to "not given"; per-command defaults are filled in after
flags and an optional --config file (key=value lines, keys named like the
flags without dashes) have been merged. A key set both ways with different
values is an error. The resolved settings are printed as a banner and written
to <output>.cfg, which can be passed back through --config to rerun.
"""

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .bench import (
    BENCH_GRAPH,
    BenchConfig,
    parse_sweep,
    plot_bench,
    run_bench,
    write_bench_csv,
)
from .errors import ConfigError, DataError, ParameterError, RSFError, UsageError
from .forest import DiagQ, sample_forest
from .graph import (
    bandlimited_signal,
    graph_from_spec,
    load_labels,
    load_pgm,
    load_signal_csv,
    save_index_map,
    save_pgm,
    save_signal_csv,
)
from .smoother import estimate, exact_smooth
from .tasks import (
    LabeledProblem,
    generalized_ssl,
    interpolate,
    irls_l1,
    label_propagate,
    label_propagate_iterative,
    newton_poisson,
    tune_generalized_ssl,
)
from .tuning import grid_search, parse_grid

logger = logging.getLogger(__name__)

SUBCOMMANDS = ("smooth", "interpolate", "ssl", "lp", "newton", "irls", "sample-forest", "tune", "bench")
FLAG_KEYS = ("quiet", "verbose", "tune", "no_fallback")
TRUE_WORDS = ("1", "true", "yes", "on")

COMMON_DEFAULTS = {"seed": 0, "quiet": False, "verbose": False}
GRAPH_DEFAULT = "grid:32x32"

DEFAULTS = {
    "smooth": {"q": 1.0, "estimator": "bar", "forests": 20, "k": 5, "snr": 2.0},
    "interpolate": {"mu": 0.0, "method": "exact", "forests": 20, "no_fallback": False},
    "ssl": {"mu": 1.0, "eta": 0.0, "method": "exact", "forests": 20, "tune": False,
            "grid": "0.5:0.5:5.0"},
    "lp": {"method": "exact", "forests": 20},
    "newton": {"mu": 1.0, "method": "exact", "forests": 20, "max_iters": 100},
    "irls": {"mu": 1.0, "method": "exact", "forests": 20, "max_iters": 50,
             "normalization": "printed", "k": 5, "snr": 2.0},
    "sample-forest": {"q": 1.0},
    "tune": {"method": "sure", "estimator": "exact", "grid": "0.5:0.5:5.0", "forests": 20,
             "k": 5, "snr": 2.0},
    "bench": {"graph": BENCH_GRAPH, "k": 5, "snr": 2.0,
              "methods": "rsf_bar,rsf_tilde,cg,pcg_jacobi,chebyshev,chebyshev_gershgorin",
              "sweep": "log:1:100:17", "realizations": 20, "timing_runs": 100},
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# ============================================
# PARSER
# ============================================

def _common_parent():
    parent = argparse.ArgumentParser(add_help=False)
    group = parent.add_argument_group("run options")
    group.add_argument("--config", help="key=value settings file (conflicts with flags are errors)")
    group.add_argument("--seed", type=int, help="master random seed (default 0)")
    group.add_argument("--threads", type=int,
                       help="worker threads (default 1 for bench, all cores otherwise)")
    group.add_argument("--output", help="primary output file (default <command>.csv)")
    group.add_argument("--quiet", action="store_const", const=True, help="no banners")
    group.add_argument("--verbose", action="store_const", const=True, help="debug logging")
    return parent


def _graph_parent():
    parent = argparse.ArgumentParser(add_help=False)
    group = parent.add_argument_group("graph source")
    group.add_argument("--graph", help=f"graph spec, e.g. grid:100x100, er:n=1000,deg=10, "
                                       f"file:edges.txt (default {GRAPH_DEFAULT})")
    group.add_argument("--image", help="8-bit PGM image; grid graph plus its pixel values")
    return parent


def _add_forests(p):
    p.add_argument("--forests", type=int, help="number of forests N")


def _add_synthetic(p):
    p.add_argument("--k", type=int, help="bandwidth of the synthetic signal used without --signal")
    p.add_argument("--snr", type=float, help="SNR of the synthetic signal")


def build_parser():
    """Returns (top-level parser, {subcommand: subparser})."""
    parser = _Parser(prog="rsfsmooth",
                     description="Random spanning forests for graph Tikhonov smoothing")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND",
                                parser_class=_Parser)
    common, graph = _common_parent(), _graph_parent()
    commands = {}

    def add(name, help_text):
        p = sub.add_parser(name, parents=[common, graph], help=help_text, description=help_text)
        commands[name] = p
        return p

    p = add("smooth", "Tikhonov smoothing x = (L + Q)^-1 Q y")
    p.add_argument("--signal", help="node,value CSV (default: image values or a synthetic signal)")
    p.add_argument("--q", type=float, help="uniform q (default 1.0)")
    p.add_argument("--q-file", help="node,value CSV with one q per node")
    p.add_argument("--estimator", choices=("exact", "tilde", "bar"))
    _add_forests(p)
    _add_synthetic(p)
    p.add_argument("--pgm-out", help="also write the result as an image (with --image)")

    p = add("interpolate", "Extend a signal known on some nodes")
    p.add_argument("--known", help="node,value CSV of the known nodes")
    p.add_argument("--mu", type=float, help="regularization, 0 gives the harmonic extension")
    p.add_argument("--method", choices=("exact", "tilde", "bar"))
    _add_forests(p)
    p.add_argument("--no-fallback", action="store_const", const=True,
                   help="fail instead of switching to the harmonic solve when mu = 0")

    p = add("ssl", "Generalized semi-supervised classification")
    p.add_argument("--labels", help="'node class' lines for the labeled nodes")
    p.add_argument("--mu", type=float)
    p.add_argument("--eta", type=float, help="degree normalization exponent")
    p.add_argument("--method", choices=("exact", "tilde", "bar"))
    _add_forests(p)
    p.add_argument("--tune", action="store_const", const=True, help="pick mu by LOOCV on --grid")
    p.add_argument("--grid", help="candidate mu values, start:step:stop or a comma list")

    p = add("lp", "Label propagation (harmonic classification)")
    p.add_argument("--labels", help="'node class' lines for the labeled nodes")
    p.add_argument("--method", choices=("exact", "rsf", "iterative"))
    _add_forests(p)

    p = add("newton", "Poisson denoising by Newton's method")
    p.add_argument("--signal", help="node,value CSV of counts (default: image pixel values)")
    p.add_argument("--mu", type=float)
    p.add_argument("--method", choices=("exact", "bar"))
    _add_forests(p)
    p.add_argument("--max-iters", type=int)
    p.add_argument("--trace", help="loss trace CSV (default <output stem>_trace.csv)")

    p = add("irls", "l1 edge-penalized smoothing by IRLS")
    p.add_argument("--signal", help="node,value CSV (default: image values or a synthetic signal)")
    p.add_argument("--mu", type=float)
    p.add_argument("--method", choices=("exact", "bar"))
    _add_forests(p)
    p.add_argument("--eps", type=float, help="smoothing floor for |Bz| (default from the data)")
    p.add_argument("--max-iters", type=int)
    p.add_argument("--normalization", choices=("printed", "balanced"))
    p.add_argument("--trace", help="objective trace CSV (default <output stem>_trace.csv)")
    _add_synthetic(p)

    p = add("sample-forest", "Draw one random spanning forest")
    p.add_argument("--q", type=float, help="uniform q (default 1.0)")
    p.add_argument("--q-file", help="node,value CSV with one q per node")

    p = add("tune", "Score a grid of mu values by SURE or LOOCV")
    p.add_argument("--signal", help="node,value CSV (default: image values or a synthetic signal)")
    p.add_argument("--method", choices=("sure", "loocv"))
    p.add_argument("--estimator", choices=("exact", "tilde", "bar"))
    p.add_argument("--sigma2", type=float, help="noise variance (SURE)")
    p.add_argument("--grid", help="candidate mu values, start:step:stop or a comma list")
    _add_forests(p)
    _add_synthetic(p)

    p = add("bench", "Error-vs-runtime benchmark of forest and iterative solvers")
    p.add_argument("--k", type=int, help="bandwidth of the test signals")
    p.add_argument("--snr", type=float)
    p.add_argument("--methods", help="comma list of methods")
    p.add_argument("--sweep", help="iteration parameters, log:lo:hi:count or a comma list")
    p.add_argument("--realizations", type=int, help="signal realizations")
    p.add_argument("--timing-runs", type=int, help="timed repetitions per cell")
    p.add_argument("--q-grid", help="candidate q values for the oracle tuning step")
    p.add_argument("--plot", help="error-vs-time figure (.svg or .png)")

    return parser, commands


# ============================================
# SETTINGS
# ============================================

def read_config_file(path):
    """key=value lines; '#' comments and blank lines ignored."""
    path = Path(path)
    if not path.exists():
        raise DataError("config file not found", path)
    entries = {}
    with open(path) as fh:
        for number, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            key, sep, value = text.partition("=")
            if not sep:
                raise ConfigError(f"{path}:{number}: expected key=value, got {text!r}")
            entries[key.strip().replace("-", "_")] = value.strip()
    return entries


def _config_tokens(entries):
    tokens = []
    for key, value in entries.items():
        if key == "config":
            raise ConfigError("a config file cannot name another config file")
        flag = "--" + key.replace("_", "-")
        if key in FLAG_KEYS:
            if value.lower() in TRUE_WORDS:
                tokens.append(flag)
        else:
            tokens += [flag, value]
    return tokens


def resolve_settings(args, subparser):
    """Merge flags, the config file and the per-command defaults."""
    settings = argparse.Namespace(**vars(args))
    if args.config:
        entries = read_config_file(args.config)
        try:
            from_file = subparser.parse_args(_config_tokens(entries))
        except UsageError as exc:
            raise ConfigError(f"{args.config}: {exc}") from exc
        for key in entries:
            value = getattr(from_file, key)
            given = getattr(settings, key)
            if value is None:
                continue
            if given is not None and given != value:
                raise ConfigError(
                    f"{key} is {given!r} on the command line but {value!r} in {args.config}"
                )
            setattr(settings, key, value)

    defaults = {**COMMON_DEFAULTS, **DEFAULTS[args.command]}
    defaults["output"] = f"{args.command}.csv"
    defaults["threads"] = 1 if args.command == "bench" else (os.cpu_count() or 1)
    for key, value in defaults.items():
        if getattr(settings, key, None) is None:
            setattr(settings, key, value)
    if settings.graph is None and settings.image is None:
        settings.graph = GRAPH_DEFAULT
    if settings.graph is not None and settings.image is not None:
        raise ConfigError("give either --graph or --image, not both")
    if settings.threads < 1:
        raise ParameterError(f"threads must be >= 1, got {settings.threads}")
    return settings


def settings_items(settings):
    """Resolved settings in a stable order, unset values and --config left out."""
    return [(key, value) for key, value in sorted(vars(settings).items())
            if key not in ("command", "config") and value is not None]


def write_config_echo(settings):
    path = Path(f"{settings.output}.cfg")
    with open(path, "w") as fh:
        fh.write(f"# rsfsmooth {settings.command}\n")
        for key, value in settings_items(settings):
            if key in FLAG_KEYS:
                value = "true" if value else "false"
            fh.write(f"{key}={value}\n")
    return path


# ============================================
# REPORTING
# ============================================

class Reporter:
    """Banner-style progress on stdout, silenced by --quiet."""

    def __init__(self, quiet=False):
        self.quiet = quiet

    def say(self, text=""):
        if not self.quiet:
            print(text)

    def banner(self, title):
        self.say("\n" + "=" * 60)
        self.say(title)
        self.say("=" * 60)

    def settings(self, settings):
        self.banner(f"RSFSMOOTH {settings.command.upper()}")
        for key, value in settings_items(settings):
            self.say(f"  {key + ':':<16}{value}")

    def step(self, index, total, text):
        self.say(f"\n[{index}/{total}] {text}")

    def ok(self, text):
        self.say(f"  [OK] {text}")


def configure_logging(settings):
    level = logging.DEBUG if settings.verbose else logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", force=True)


# ============================================
# INPUTS
# ============================================

def load_graph(settings):
    """
    Returns (graph, pixel values or None). A generated graph cut down to its
    largest component also writes <output stem>_index_map.csv.
    """
    if settings.image is not None:
        return load_pgm(settings.image)
    g = graph_from_spec(settings.graph, seed=settings.seed)
    if g.index_map is not None:
        output = Path(settings.output)
        path = output.with_name(f"{output.stem}_index_map.csv")
        save_index_map(path, g.index_map)
        logger.info("node ids refer to the largest component, map in %s", path)
    return g, None


def load_q(settings, g):
    if settings.q_file is not None:
        q = load_signal_csv(settings.q_file, g.n)
        if np.isnan(q).any():
            raise DataError("q file must list every node", settings.q_file)
        return q
    return settings.q


def load_input_signal(settings, g, pixels, sigma2=None):
    """
    The --signal CSV, else the image pixels, else a synthetic bandlimited
    signal drawn with --k / --snr (noise variance sigma2 if given).
    Returns (y, clean x or None).
    """
    if getattr(settings, "signal", None) is not None:
        y = load_signal_csv(settings.signal, g.n)
        if np.isnan(y).any():
            raise DataError("signal file must list every node", settings.signal)
        return y, None
    if pixels is not None:
        return pixels, None
    snr = settings.snr if sigma2 is None else 1.0 / (g.n * sigma2)
    x, y, _ = bandlimited_signal(g, settings.k, snr, seed=settings.seed)
    return y, x


def load_problem(settings, g):
    if settings.labels is None:
        raise ConfigError(f"{settings.command} needs --labels")
    return LabeledProblem.from_labels(load_labels(settings.labels, g.n))


def _trace_path(settings):
    if settings.trace is not None:
        return Path(settings.trace)
    output = Path(settings.output)
    return output.with_name(f"{output.stem}_trace.csv")


# ============================================
# COMMANDS
# ============================================

def cmd_smooth(s, report):
    report.step(1, 3, "Loading graph and signal...")
    g, pixels = load_graph(s)
    y, _ = load_input_signal(s, g, pixels)
    q = load_q(s, g)
    report.ok(f"{g.name}: {g.n} nodes, {g.n_edges} edges")

    report.step(2, 3, f"Smoothing ({s.estimator})...")
    if s.estimator == "exact":
        values = exact_smooth(g, q, y)
    else:
        result = estimate(s.estimator, g, q, y, s.forests, seed=s.seed, threads=s.threads)
        values = result.values
        report.ok(f"{result.n_forests} forests, mean root count {result.mean_root_count:.2f}")

    report.step(3, 3, "Writing output...")
    save_signal_csv(s.output, values)
    if s.pgm_out is not None:
        if g.shape is None:
            raise ConfigError("--pgm-out needs an image graph")
        save_pgm(s.pgm_out, values, g.shape)
    report.ok(s.output)


def cmd_interpolate(s, report):
    g, _ = load_graph(s)
    if s.known is None:
        raise ConfigError("interpolate needs --known")
    known = load_signal_csv(s.known, g.n)
    nodes = np.flatnonzero(~np.isnan(known))
    report.step(1, 2, f"Interpolating from {nodes.size} of {g.n} nodes ({s.method})...")
    values = interpolate(g, nodes, known[nodes], mu=s.mu, method=s.method, n_forests=s.forests,
                         seed=s.seed, threads=s.threads, allow_fallback=not s.no_fallback)
    report.step(2, 2, "Writing output...")
    save_signal_csv(s.output, values)
    report.ok(s.output)


def cmd_ssl(s, report):
    g, _ = load_graph(s)
    problem = load_problem(s, g)
    mu = s.mu
    if s.tune:
        report.step(1, 2, "Tuning mu by LOOCV...")
        tuned = tune_generalized_ssl(g, problem, parse_grid(s.grid), eta=s.eta, method=s.method,
                                     n_forests=s.forests, seed=s.seed, threads=s.threads)
        mu = tuned.best
        report.ok(f"mu = {mu}")
    report.step(2, 2, f"Classifying {problem.unlabeled.size} nodes ({s.method})...")
    result = generalized_ssl(g, problem, mu, eta=s.eta, method=s.method, n_forests=s.forests,
                             seed=s.seed, threads=s.threads)
    result.to_csv(s.output)
    report.ok(s.output)


def cmd_lp(s, report):
    g, _ = load_graph(s)
    problem = load_problem(s, g)
    report.step(1, 1, f"Propagating {problem.nodes.size} labels ({s.method})...")
    if s.method == "iterative":
        result, iterations = label_propagate_iterative(g, problem)
        report.ok(f"{iterations} iterations")
    else:
        result = label_propagate(g, problem, s.method, n_forests=s.forests, seed=s.seed,
                                 threads=s.threads)
    result.to_csv(s.output)
    report.ok(s.output)


def cmd_newton(s, report):
    g, pixels = load_graph(s)
    if s.signal is not None:
        counts, _ = load_input_signal(s, g, None)
    elif pixels is not None:
        counts = np.rint(pixels * 255.0)
    else:
        raise ConfigError("newton needs --signal or --image")
    report.step(1, 2, f"Newton iterations ({s.method})...")
    t, trace = newton_poisson(g, counts, s.mu, method=s.method, n_forests=s.forests,
                              seed=s.seed, threads=s.threads, max_iters=s.max_iters)
    state = "converged" if trace.converged else "stopped"
    report.ok(f"{state} after {len(trace.losses)} iterations, loss {trace.final_loss:.8g}")
    report.step(2, 2, "Writing output...")
    save_signal_csv(s.output, np.exp(t))
    trace.to_csv(_trace_path(s))
    report.ok(s.output)


def cmd_irls(s, report):
    g, pixels = load_graph(s)
    y, _ = load_input_signal(s, g, pixels)
    report.step(1, 2, f"IRLS iterations ({s.method})...")
    z, trace = irls_l1(g, y, s.mu, method=s.method, n_forests=s.forests, seed=s.seed,
                       threads=s.threads, eps=s.eps, max_iters=s.max_iters,
                       normalization=s.normalization)
    report.ok(f"{len(trace.losses)} iterations, objective {trace.final_loss:.8g}")
    report.step(2, 2, "Writing output...")
    save_signal_csv(s.output, z)
    trace.to_csv(_trace_path(s))
    report.ok(s.output)


def cmd_sample_forest(s, report):
    g, _ = load_graph(s)
    q = DiagQ.of(load_q(s, g), g.n)
    forest = sample_forest(g, q, seed=s.seed)
    forest.to_csv(s.output)
    report.ok(f"{forest.n_roots} roots, {forest.walk_steps} walk steps -> {s.output}")


def cmd_tune(s, report):
    g, pixels = load_graph(s)
    y, _ = load_input_signal(s, g, pixels, sigma2=s.sigma2)
    if s.method == "sure" and s.sigma2 is None:
        raise ConfigError("tune --method sure needs --sigma2")
    method = f"{s.method}_{'exact' if s.estimator == 'exact' else 'rsf'}"
    which = "bar" if s.estimator == "exact" else s.estimator
    grid = parse_grid(s.grid)
    report.step(1, 2, f"Scoring {grid.size} candidates ({method})...")
    result = grid_search(g, y, grid, method, sigma2=s.sigma2, which=which,
                         n_forests=s.forests, seed=s.seed, threads=s.threads)
    report.ok(f"best mu = {result.best}")
    report.step(2, 2, "Writing output...")
    result.to_csv(s.output)
    report.ok(s.output)


def cmd_bench(s, report):
    if s.image is not None:
        raise ConfigError("bench takes --graph only")
    cfg = BenchConfig(
        graph=s.graph, k=s.k, snr=s.snr,
        methods=tuple(m.strip() for m in s.methods.split(",") if m.strip()),
        sweep=tuple(parse_sweep(s.sweep).tolist()),
        realizations=s.realizations, timing_runs=s.timing_runs, seed=s.seed, threads=s.threads,
    )
    if s.q_grid is not None:
        cfg.q_grid = tuple(parse_grid(s.q_grid).tolist())
    report.step(1, 2, f"Running {len(cfg.methods)} methods x {len(cfg.sweep)} parameters "
                      f"x {cfg.realizations} realizations...")
    result = run_bench(cfg)
    failed = sum(1 for r in result.records if not np.isfinite(r.approx_err))
    report.ok(f"{len(result.records)} records, {failed} failed cells")
    report.step(2, 2, "Writing output...")
    write_bench_csv(s.output, result)
    report.ok(s.output)
    if s.plot is not None:
        plot_bench(result.records, s.plot, result.plateau_err, result.exact_time_s)
        report.ok(s.plot)


COMMANDS = {
    "smooth": cmd_smooth,
    "interpolate": cmd_interpolate,
    "ssl": cmd_ssl,
    "lp": cmd_lp,
    "newton": cmd_newton,
    "irls": cmd_irls,
    "sample-forest": cmd_sample_forest,
    "tune": cmd_tune,
    "bench": cmd_bench,
}


def main(argv=None):
    """Run one subcommand; returns the process exit code."""
    parser, commands = build_parser()
    try:
        args = parser.parse_args(argv)
        settings = resolve_settings(args, commands[args.command])
        configure_logging(settings)
        report = Reporter(settings.quiet)
        report.settings(settings)
        COMMANDS[settings.command](settings, report)
        write_config_echo(settings)
    except SystemExit as exc:
        # --help
        return exc.code if isinstance(exc.code, int) else 0
    except RSFError as exc:
        print(f"error[{exc.kind}]: {exc}", file=sys.stderr)
        return exc.exit_code
    except Exception as exc:
        logger.debug("unexpected failure", exc_info=True)
        message = " ".join(str(exc).split())
        print(f"error[internal]: {type(exc).__name__}: {message}", file=sys.stderr)
        return RSFError.exit_code
    report.say("\n" + "=" * 60)
    report.say("DONE")
    report.say("=" * 60)
    return 0
