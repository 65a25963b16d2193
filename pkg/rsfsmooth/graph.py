"""
Weighted undirected graphs and everything that touches them directly.

This module provides:
1. Graph: immutable CSR adjacency with per-node degree sums
2. Laplacian and incidence operators (L z = D z - W z, B z edge-wise)
3. Generators (grid, Erdos-Renyi, Barabasi-Albert, k-regular, Euclidean k-NN)
4. Band-limited test signals
5. File I/O: edge lists, label files, linqs citation datasets, 8-bit PGM
   images, CSV signal dumps

Signals are plain numpy arrays of length n, or n x C for several signals
sharing one graph.
"""

import logging
import re
import warnings
from dataclasses import dataclass, replace
from functools import cached_property
from pathlib import Path

import networkx as nx
import numpy as np
import rasterio
import scipy.linalg
import scipy.sparse as sp
from rasterio.errors import NotGeoreferencedWarning, RasterioIOError
from scipy.sparse import csgraph
from scipy.sparse.linalg import eigsh
from scipy.spatial import cKDTree

from .errors import CapabilityError, DataError, DimensionError, ParameterError

logger = logging.getLogger(__name__)

# ============================================
# LIMITS
# ============================================
DENSE_MAX_N = 3000            # largest graph for dense eigendecomposition / inverse
PARTIAL_SPECTRUM_MAX_K = 64   # lowest modes computed by Lanczos on larger graphs
K_REGULAR_ATTEMPTS = 10       # reseeded draws before falling back to largest component
PGM_MAXVAL = 255


# ============================================
# GRAPH TYPE
# ============================================

@dataclass(frozen=True, eq=False)
class Graph:
    """
    Immutable weighted undirected graph.

    adjacency is a symmetric scipy CSR matrix with sorted indices, strictly
    positive weights and an empty diagonal. Build instances with
    Graph.from_edges or Graph.from_adjacency rather than directly.

    shape is (rows, cols) for image grids, None otherwise. index_map is set
    when the graph was cut out of a larger one: index_map[new] = old.
    """

    adjacency: sp.csr_matrix
    name: str = "graph"
    shape: tuple | None = None
    index_map: np.ndarray | None = None

    @classmethod
    def from_edges(cls, n, u, v, w=None, name="graph", merge="sum", shape=None):
        """
        Build a graph from an undirected edge list.

        Orientation is dropped: (u, v) and (v, u) describe the same edge.
        Repeated edges are merged with merge="sum" (weights added) or
        merge="max" (one unit edge for mutual k-NN pairs).
        """
        u = np.asarray(u, dtype=np.int64).ravel()
        v = np.asarray(v, dtype=np.int64).ravel()
        w = np.ones(u.size) if w is None else np.asarray(w, dtype=float).ravel()

        if n < 1:
            raise ParameterError(f"a graph needs at least one node, got n={n}")
        if not (u.size == v.size == w.size):
            raise DimensionError(
                f"edge arrays differ in length: {u.size}, {v.size}, {w.size}"
            )
        if u.size and (min(u.min(), v.min()) < 0 or max(u.max(), v.max()) >= n):
            raise ParameterError(f"edge endpoint outside 0..{n - 1}")
        if np.any(~np.isfinite(w)) or np.any(w <= 0):
            raise ParameterError("edge weights must be finite and strictly positive")
        if np.any(u == v):
            raise ParameterError(f"self-loop on node {int(u[u == v][0])}")

        lo = np.minimum(u, v)
        hi = np.maximum(u, v)
        if merge == "max" and lo.size:
            keys, inverse = np.unique(lo * n + hi, return_inverse=True)
            w_merged = np.zeros(keys.size)
            np.maximum.at(w_merged, inverse, w)
            lo, hi, w = keys // n, keys % n, w_merged
        elif merge != "sum" and merge != "max":
            raise ParameterError(f"unknown merge rule {merge!r}")

        # coo -> csr sums duplicates
        upper = sp.coo_matrix((w, (lo, hi)), shape=(n, n)).tocsr()
        adjacency = (upper + upper.T).tocsr()
        return cls.from_adjacency(adjacency, name=name, shape=shape, validate=False)

    @classmethod
    def from_adjacency(cls, adjacency, name="graph", shape=None, validate=True):
        """Wrap a scipy sparse adjacency matrix, checking the graph invariants."""
        adjacency = sp.csr_matrix(adjacency, dtype=float)
        adjacency.eliminate_zeros()
        adjacency.sum_duplicates()
        adjacency.sort_indices()
        if validate:
            if adjacency.shape[0] != adjacency.shape[1]:
                raise DimensionError(f"adjacency must be square, got {adjacency.shape}")
            if adjacency.diagonal().any():
                raise ParameterError("adjacency has self-loops")
            if adjacency.nnz and adjacency.data.min() <= 0:
                raise ParameterError("edge weights must be strictly positive")
            if adjacency.nnz and abs(adjacency - adjacency.T).max() > 0:
                raise ParameterError("adjacency is not symmetric")
        return cls(adjacency, name=name, shape=shape)

    # --------------------------------------------
    # Basic properties
    # --------------------------------------------
    @property
    def n(self):
        return self.adjacency.shape[0]

    @property
    def n_edges(self):
        return self.adjacency.nnz // 2

    @cached_property
    def degree(self):
        """Per-node sum of incident weights (read-only)."""
        d = np.asarray(self.adjacency.sum(axis=1), dtype=float).ravel()
        d.flags.writeable = False
        return d

    @cached_property
    def edge_list(self):
        """(u, v, w) with u < v, sorted by (u, v). Fixed edge enumeration for B."""
        upper = sp.triu(self.adjacency, k=1, format="coo")
        order = np.lexsort((upper.col, upper.row))
        return (
            upper.row[order].astype(np.int64),
            upper.col[order].astype(np.int64),
            upper.data[order].astype(float),
        )

    @cached_property
    def walk_arrays(self):
        """
        Contiguous arrays for the forest sampler:
        indptr, indices, per-row cumulative weights, degree.
        """
        indptr = np.ascontiguousarray(self.adjacency.indptr, dtype=np.int64)
        indices = np.ascontiguousarray(self.adjacency.indices, dtype=np.int64)
        weights = np.ascontiguousarray(self.adjacency.data, dtype=float)
        running = np.concatenate([[0.0], np.cumsum(weights)])
        row_offset = np.repeat(running[indptr[:-1]], np.diff(indptr))
        cumulative = running[1:] - row_offset
        degree = np.ascontiguousarray(self.degree, dtype=float)
        return indptr, indices, cumulative, degree

    def neighbors(self, i):
        """Neighbor indices and weights of node i."""
        start, stop = self.adjacency.indptr[i], self.adjacency.indptr[i + 1]
        return self.adjacency.indices[start:stop], self.adjacency.data[start:stop]

    # --------------------------------------------
    # Structure
    # --------------------------------------------
    def components(self):
        """Connected-component labels, one integer per node."""
        _, labels = csgraph.connected_components(self.adjacency, directed=False)
        return labels

    @property
    def is_connected(self):
        return self.n == 1 or csgraph.connected_components(
            self.adjacency, directed=False, return_labels=False
        ) == 1

    def subgraph(self, nodes, name=None):
        """Induced subgraph on `nodes`, relabelled 0..len(nodes)-1 in the given order."""
        nodes = np.asarray(nodes, dtype=np.int64)
        sub = self.adjacency[nodes][:, nodes]
        return Graph.from_adjacency(sub, name=name or f"{self.name}_sub", validate=False)

    def reweighted(self, edge_weights, name=None):
        """Same edges, new weights aligned with edge_list."""
        u, v, _ = self.edge_list
        return Graph.from_edges(
            self.n, u, v, edge_weights, name=name or self.name, shape=self.shape
        )


def as_signal(g, z, name="signal"):
    """Return z as a float array whose first axis matches g.n."""
    z = np.asarray(z, dtype=float)
    if z.ndim not in (1, 2) or z.shape[0] != g.n:
        raise DimensionError(
            f"{name} has shape {z.shape}, expected ({g.n},) or ({g.n}, C)"
        )
    return z


def scale_rows(weights, z):
    """Multiply row i of z by weights[i] (z may be 1-D or 2-D)."""
    return weights[:, None] * z if z.ndim == 2 else weights * z


# ============================================
# LINEAR OPERATORS
# ============================================

def laplacian_apply(g, z):
    """L z = D z - W z for one signal or an n x C block of signals."""
    z = as_signal(g, z)
    return scale_rows(g.degree, z) - g.adjacency @ z


def incidence_apply(g, z):
    """
    B z, one value per edge of g.edge_list: sqrt(w) * (z[u] - z[v]) with u < v.

    sum((B z)**2) equals z . (L z).
    """
    z = as_signal(g, z)
    u, v, w = g.edge_list
    root_w = np.sqrt(w)
    diff = z[u] - z[v]
    return root_w[:, None] * diff if z.ndim == 2 else root_w * diff


def dense_laplacian(g):
    """Dense L. Only for graphs up to DENSE_MAX_N nodes."""
    if g.n > DENSE_MAX_N:
        raise CapabilityError(
            f"dense Laplacian requested for n={g.n} > {DENSE_MAX_N}"
        )
    return np.diag(np.asarray(g.degree)) - g.adjacency.toarray()


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenvalues (nondecreasing) and orthonormal eigenvectors of L."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def laplacian_spectrum(g):
    """Full symmetric eigendecomposition of L (n <= DENSE_MAX_N)."""
    if g.n > DENSE_MAX_N:
        raise CapabilityError(
            f"dense spectrum needs n <= {DENSE_MAX_N}, graph has {g.n} nodes"
        )
    eigenvalues, eigenvectors = scipy.linalg.eigh(dense_laplacian(g))
    return Spectrum(eigenvalues, eigenvectors)


def lowest_eigenvectors(g, k):
    """
    The k lowest-frequency eigenvectors of L as an n x k matrix.

    Dense for n <= DENSE_MAX_N, shift-invert Lanczos otherwise.
    """
    if g.n <= DENSE_MAX_N:
        return laplacian_spectrum(g).eigenvectors[:, :k]
    if k > PARTIAL_SPECTRUM_MAX_K:
        raise CapabilityError(
            f"k={k} lowest modes on n={g.n} nodes exceeds the partial-spectrum "
            f"limit of {PARTIAL_SPECTRUM_MAX_K}"
        )
    laplacian = (sp.diags(np.asarray(g.degree)) - g.adjacency).tocsc()
    start = np.random.default_rng(0).standard_normal(g.n)
    eigenvalues, eigenvectors = eigsh(laplacian, k=k, sigma=-1e-3, which="LM", v0=start)
    order = np.argsort(eigenvalues)
    return eigenvectors[:, order]


# ============================================
# GENERATORS
# ============================================

def grid2d(rows, cols, periodic=False):
    """
    4-neighbour pixel grid with unit weights, row-major node order
    (node = r * cols + c). periodic=True wraps both axes (torus).
    """
    if rows < 1 or cols < 1:
        raise ParameterError(f"grid dimensions must be positive, got {rows}x{cols}")
    if periodic and (rows < 3 or cols < 3):
        raise ParameterError("a periodic grid needs at least 3 rows and 3 columns")

    index = np.arange(rows * cols).reshape(rows, cols)
    u = [index[:, :-1].ravel(), index[:-1, :].ravel()]
    v = [index[:, 1:].ravel(), index[1:, :].ravel()]
    if periodic:
        u += [index[:, -1], index[-1, :]]
        v += [index[:, 0], index[0, :]]

    name = f"grid{rows}x{cols}" + ("p" if periodic else "")
    return Graph.from_edges(
        rows * cols, np.concatenate(u), np.concatenate(v), name=name, shape=(rows, cols)
    )


def _from_networkx(nx_graph, name):
    edges = np.array(list(nx_graph.edges()), dtype=np.int64).reshape(-1, 2)
    return Graph.from_edges(nx_graph.number_of_nodes(), edges[:, 0], edges[:, 1], name=name)


def _connected_or_largest(g):
    if g.is_connected:
        return g
    largest, _ = largest_component(g)
    logger.warning(
        "%s is disconnected; kept largest component with %d of %d nodes",
        g.name, largest.n, g.n,
    )
    return largest


def erdos_renyi(n, avg_degree=10.0, seed=None):
    """G(n, p) with p = avg_degree / (n - 1); largest component if disconnected."""
    if n < 2 or not 0 < avg_degree <= n - 1:
        raise ParameterError(f"infeasible Erdos-Renyi parameters n={n}, deg={avg_degree}")
    p = avg_degree / (n - 1)
    g = _from_networkx(nx.fast_gnp_random_graph(n, p, seed=seed), name=f"er{n}")
    return _connected_or_largest(g)


def barabasi_albert(n, m=2, seed=None):
    """Preferential attachment with m edges per new node (connected by construction)."""
    if not 1 <= m < n:
        raise ParameterError(f"Barabasi-Albert needs 1 <= m < n, got m={m}, n={n}")
    return _from_networkx(nx.barabasi_albert_graph(n, m, seed=seed), name=f"ba{n}")


def k_regular(n, k=10, seed=None):
    """Uniform random k-regular graph; redrawn with seed+1, seed+2, ... until connected."""
    if k < 1 or k >= n or (n * k) % 2:
        raise ParameterError(
            f"no {k}-regular graph on {n} nodes (need 1 <= k < n and n*k even)"
        )
    g = None
    for attempt in range(K_REGULAR_ATTEMPTS):
        attempt_seed = None if seed is None else seed + attempt
        g = _from_networkx(nx.random_regular_graph(k, n, seed=attempt_seed), name=f"kreg{n}")
        if g.is_connected:
            return g
        logger.info("k-regular draw %d disconnected, retrying", attempt)
    return _connected_or_largest(g)


def knn_euclidean(n, k=20, dim=3, seed=None):
    """
    Symmetrized k-nearest-neighbour graph of n uniform points in [0,1]^dim.
    Each point links to its k nearest neighbours, both directions added,
    unit weights.
    """
    if not 1 <= k < n or dim < 1:
        raise ParameterError(f"infeasible k-NN parameters n={n}, k={k}, dim={dim}")
    rng = np.random.default_rng(seed)
    points = rng.random((n, dim))
    _, neighbours = cKDTree(points).query(points, k=k + 1)
    u = np.repeat(np.arange(n), k)
    v = neighbours[:, 1:].ravel()
    keep = u != v
    g = Graph.from_edges(n, u[keep], v[keep], name=f"knn{n}", merge="max")
    return _connected_or_largest(g)


GENERATORS = {
    "grid2d": grid2d,
    "erdos_renyi": erdos_renyi,
    "barabasi_albert": barabasi_albert,
    "k_regular": k_regular,
    "knn_euclidean": knn_euclidean,
}


def generate(kind, params=None, seed=None):
    """Dispatch to a generator by name: generate("k_regular", {"n": 100, "k": 4}, seed=1)."""
    params = dict(params or {})
    if kind not in GENERATORS:
        raise ParameterError(f"unknown graph kind {kind!r}; choose from {sorted(GENERATORS)}")
    if kind != "grid2d":
        params["seed"] = seed
    try:
        return GENERATORS[kind](**params)
    except TypeError as exc:
        raise ParameterError(f"bad parameters for {kind}: {exc}") from exc


_SPEC_KINDS = {
    "er": ("erdos_renyi", {"n": int, "deg": float}, {"deg": "avg_degree"}),
    "ba": ("barabasi_albert", {"n": int, "m": int}, {}),
    "kreg": ("k_regular", {"n": int, "k": int}, {}),
    "knn": ("knn_euclidean", {"n": int, "k": int, "dim": int}, {}),
}


def graph_from_spec(spec, seed=None):
    """
    Build a graph from a short text spec:

        grid:100x100            grid:100x100:periodic
        er:n=10000,deg=10       ba:n=10000,m=2
        kreg:n=10000,k=10       knn:n=10000,k=20,dim=3
        file:<edge list path>   pgm:<image path>
    """
    kind, _, rest = spec.partition(":")
    if kind == "grid":
        match = re.fullmatch(r"(\d+)x(\d+)(:periodic)?", rest)
        if not match:
            raise ParameterError(f"bad grid spec {spec!r}, expected grid:ROWSxCOLS[:periodic]")
        return grid2d(int(match[1]), int(match[2]), periodic=bool(match[3]))
    if kind == "file":
        return load_edge_list(rest)
    if kind == "pgm":
        return load_pgm(rest)[0]
    if kind not in _SPEC_KINDS:
        raise ParameterError(f"unknown graph spec {spec!r}")

    generator, types, renames = _SPEC_KINDS[kind]
    params = {}
    for item in filter(None, rest.split(",")):
        key, sep, value = item.partition("=")
        if not sep or key not in types:
            raise ParameterError(f"bad parameter {item!r} in graph spec {spec!r}")
        try:
            params[renames.get(key, key)] = types[key](value)
        except ValueError as exc:
            raise ParameterError(f"bad value in graph spec {spec!r}: {exc}") from exc
    return generate(generator, params, seed=seed)


def largest_component(g):
    """
    Largest connected component, nodes relabelled contiguously in original order.

    Returns (subgraph, index_map) where index_map[new] = old. The subgraph
    also carries the map in its index_map field, composed with g.index_map.
    """
    labels = g.components()
    counts = np.bincount(labels)
    if counts.size == 1:
        return g, np.arange(g.n)
    index_map = np.flatnonzero(labels == np.argmax(counts))
    origin = index_map if g.index_map is None else g.index_map[index_map]
    sub = replace(g.subgraph(index_map, name=g.name), index_map=origin)
    return sub, index_map


# ============================================
# SIGNALS
# ============================================

def bandlimited_signal(g, k, snr=2.0, seed=None):
    """
    Random k-bandlimited signal and a noisy observation of it.

    x = sum_{i<=k} alpha_i u_i with alpha_i ~ N(0, 1), scaled to unit norm;
    sigma2 = 1 / (n * snr); y = x + N(0, sigma2) noise.

    Returns (x, y, sigma2).
    """
    if not 1 <= k <= g.n:
        raise ParameterError(f"k must lie in 1..{g.n}, got {k}")
    if snr <= 0:
        raise ParameterError(f"snr must be positive, got {snr}")

    rng = np.random.default_rng(seed)
    basis = lowest_eigenvectors(g, k)
    x = basis @ rng.standard_normal(k)
    x /= np.linalg.norm(x)
    sigma2 = 1.0 / (g.n * snr)
    y = x + rng.normal(0.0, np.sqrt(sigma2), size=g.n)
    return x, y, sigma2


# ============================================
# FILE I/O
# ============================================

def load_edge_list(path, n=None, merge="sum"):
    """
    Read whitespace-separated `u v [w]` lines (0-indexed, w defaults to 1).

    '#' starts a comment; a `# nodes: N` header fixes the node count.
    Duplicate edges are summed and orientation is dropped.
    """
    path = Path(path)
    if not path.exists():
        raise DataError("edge list not found", path)

    us, vs, ws = [], [], []
    header_n = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            header = re.match(r"#\s*nodes:\s*(\d+)", line)
            if header:
                header_n = int(header[1])
                continue
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            parts = text.split()
            if len(parts) not in (2, 3):
                raise DataError(f"expected 'u v w', got {text!r}", path, lineno)
            try:
                a, b = int(parts[0]), int(parts[1])
                w = float(parts[2]) if len(parts) == 3 else 1.0
            except ValueError:
                raise DataError(f"cannot parse {text!r}", path, lineno) from None
            limit = n if n is not None else header_n
            if a < 0 or b < 0 or (limit is not None and max(a, b) >= limit):
                raise DataError(f"node index out of range in {text!r}", path, lineno)
            if not np.isfinite(w) or w <= 0:
                raise DataError(f"non-positive weight {w}", path, lineno)
            if a == b:
                logger.warning("%s:%d: self-loop on node %d dropped", path, lineno, a)
                continue
            us.append(a)
            vs.append(b)
            ws.append(w)

    n = n if n is not None else header_n
    if n is None:
        if not us:
            raise DataError("edge list contains no edges", path)
        n = max(max(us), max(vs)) + 1
    return Graph.from_edges(n, us, vs, ws, name=path.stem, merge=merge)


def save_edge_list(g, path):
    """Write g as `u v w` lines (u < v), with a `# nodes: N` header."""
    u, v, w = g.edge_list
    with open(path, "w") as fh:
        fh.write(f"# nodes: {g.n}\n")
        for a, b, weight in zip(u.tolist(), v.tolist(), w.tolist()):
            fh.write(f"{a} {b} {weight!r}\n")


def save_index_map(path, index_map):
    """CSV `new,old` rows mapping relabelled nodes back to the source ids."""
    index_map = np.asarray(index_map, dtype=np.int64)
    with open(path, "w") as fh:
        fh.write("new,old\n")
        for new, old in enumerate(index_map.tolist()):
            fh.write(f"{new},{old}\n")


def load_labels(path, n=None):
    """
    Read `u c` lines into a length-n integer array, -1 for unlabeled nodes.
    n defaults to the largest node index + 1.
    """
    path = Path(path)
    if not path.exists():
        raise DataError("label file not found", path)

    pairs = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            parts = text.split()
            try:
                node, label = int(parts[0]), int(parts[1])
            except (ValueError, IndexError):
                raise DataError(f"expected 'u c', got {text!r}", path, lineno) from None
            if node < 0 or label < 0 or (n is not None and node >= n):
                raise DataError(f"index out of range in {text!r}", path, lineno)
            pairs.append((node, label))

    if n is None:
        n = max((node for node, _ in pairs), default=-1) + 1
    labels = np.full(n, -1, dtype=np.int64)
    for node, label in pairs:
        labels[node] = label
    return labels


def load_linqs(cites_path, content_path, name=None):
    """
    Read a citation dataset in the linqs `.cites` / `.content` format.

    `.content` rows are `<paper> <features...> <class>`; node ids follow their
    order there. `.cites` rows `<cited> <citing>` become unit undirected edges
    (mutual citations collapse to one edge). Citations naming papers absent
    from `.content`, and self-citations, are dropped.

    Returns (Graph, labels, class_names, paper_ids).
    """
    cites_path, content_path = Path(cites_path), Path(content_path)
    for path in (cites_path, content_path):
        if not path.exists():
            raise DataError("citation file not found", path)

    paper_ids, classes = [], []
    with open(content_path) as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) < 2:
                raise DataError(f"expected '<paper> ... <class>', got {line.strip()!r}",
                                content_path, lineno)
            paper_ids.append(parts[0])
            classes.append(parts[-1])
    index = {paper: i for i, paper in enumerate(paper_ids)}
    if len(index) != len(paper_ids):
        raise DataError("a paper id appears twice", content_path)
    class_names = sorted(set(classes))
    class_index = {c: i for i, c in enumerate(class_names)}
    labels = np.array([class_index[c] for c in classes], dtype=np.int64)

    u, v = [], []
    dropped = 0
    with open(cites_path) as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 2:
                raise DataError(f"expected '<cited> <citing>', got {line.strip()!r}",
                                cites_path, lineno)
            a, b = index.get(parts[0]), index.get(parts[1])
            if a is None or b is None or a == b:
                dropped += 1
                continue
            u.append(a)
            v.append(b)
    if dropped:
        logger.info("%s: dropped %d citations (unknown paper or self-citation)",
                    cites_path.name, dropped)

    g = Graph.from_edges(len(paper_ids), u, v, name=name or content_path.stem, merge="max")
    return g, labels, class_names, paper_ids


def save_labels(path, labels):
    """Write `u c` lines for every node with a label >= 0."""
    labels = np.asarray(labels, dtype=np.int64)
    with open(path, "w") as fh:
        for node in np.flatnonzero(labels >= 0).tolist():
            fh.write(f"{node} {labels[node]}\n")


def load_pgm(path):
    """
    Read a binary (P5) 8-bit PGM image.

    Returns (grid graph, intensities scaled to [0, 1] in row-major order).
    """
    path = Path(path)
    if not path.exists():
        raise DataError("image not found", path)
    with open(path, "rb") as fh:
        if fh.read(2) != b"P5":
            raise DataError("not a binary P5 PGM file", path, 1)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NotGeoreferencedWarning)
        try:
            with rasterio.open(path) as src:
                if src.count != 1 or src.dtypes[0] != "uint8":
                    raise DataError("expected an 8-bit single-band image", path)
                pixels = src.read(1)
        except RasterioIOError as exc:
            raise DataError(f"unreadable PGM: {exc}", path) from exc

    rows, cols = pixels.shape
    g = grid2d(rows, cols)
    g = Graph(g.adjacency, name=path.stem, shape=(rows, cols))
    return g, pixels.astype(float).ravel() / PGM_MAXVAL


def save_pgm(path, values, shape):
    """Write a signal as an 8-bit P5 PGM (values clipped to [0, 1], rounded)."""
    values = np.asarray(values, dtype=float)
    rows, cols = shape
    if values.size != rows * cols:
        raise DimensionError(f"signal of length {values.size} does not fit {rows}x{cols}")
    if np.isnan(values).any():
        raise ParameterError("cannot write NaN pixels")
    pixels = np.rint(np.clip(values, 0.0, 1.0) * PGM_MAXVAL).astype(np.uint8)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NotGeoreferencedWarning)
        with rasterio.open(
            path, "w", driver="PNM", height=rows, width=cols, count=1, dtype="uint8"
        ) as dst:
            dst.write(pixels.reshape(rows, cols), 1)


def save_signal_csv(path, values):
    """CSV dump with header `node,value` (or node,value_0..value_{C-1})."""
    values = np.asarray(values, dtype=float)
    block = values.reshape(values.shape[0], -1)
    if block.shape[1] == 1:
        header = "node,value"
    else:
        header = "node," + ",".join(f"value_{c}" for c in range(block.shape[1]))
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for node, row in enumerate(block.tolist()):
            fh.write(f"{node}," + ",".join(repr(x) for x in row) + "\n")


def load_signal_csv(path, n=None):
    """
    Read a `node,value[...]` CSV. Nodes may appear in any order.

    With n given, missing nodes are NaN; otherwise every node 0..max must appear.
    """
    path = Path(path)
    if not path.exists():
        raise DataError("signal file not found", path)
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text or text.startswith("#") or (lineno == 1 and text.startswith("node")):
                continue
            try:
                parts = [float(x) for x in text.split(",")]
                node = int(parts[0])
            except ValueError:
                raise DataError(f"cannot parse {text!r}", path, lineno) from None
            if node < 0 or (n is not None and node >= n) or len(parts) < 2:
                raise DataError(f"bad row {text!r}", path, lineno)
            rows.append((node, parts[1:]))

    if not rows:
        raise DataError("signal file has no rows", path)
    width = len(rows[0][1])
    size = n if n is not None else max(node for node, _ in rows) + 1
    values = np.full((size, width), np.nan)
    for node, row in rows:
        if len(row) != width:
            raise DataError(f"row for node {node} has {len(row)} values, expected {width}", path)
        values[node] = row
    if n is None and np.isnan(values).any():
        raise DataError("signal file skips some nodes", path)
    return values[:, 0] if width == 1 else values
