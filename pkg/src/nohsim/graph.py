"""Static undirected graphs and the initial-topology generators.

Graphs are stored in compressed sparse row form (``indptr``/``indices``)
with every neighbor list sorted ascending. All generators draw from a
``numpy.random.Generator`` backed by PCG64, so a seed reproduces the same
adjacency on any platform.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Union

import numba
import numpy as np

from .errors import EdgeListParseError, ParameterError

SeedLike = Union[int, np.random.Generator, None]


def make_rng(seed: SeedLike = None) -> np.random.Generator:
    """Return a PCG64-backed generator; generators are passed through."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


def _readonly(a):
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable simple undirected graph on vertices ``0..n_vertices-1``.

    Use :meth:`from_edges` rather than the constructor; it drops
    self-loops and duplicate edges and builds sorted neighbor lists.
    ``labels`` optionally maps dense ids back to ids found in a file.
    """

    indptr: np.ndarray
    indices: np.ndarray
    labels: np.ndarray | None = field(default=None)

    @classmethod
    def from_edges(cls, n_vertices, u, v=None, labels=None) -> "Graph":
        """Build a graph from endpoint arrays.

        ``u`` may also be an ``(m, 2)`` array when ``v`` is omitted.
        """
        n = int(n_vertices)
        if n < 0:
            raise ParameterError("n_vertices must be non-negative")
        u = np.asarray(u, dtype=np.int64)
        if v is None:
            u = u.reshape(-1, 2)
            u, v = u[:, 0], u[:, 1]
        else:
            v = np.asarray(v, dtype=np.int64)
        if u.shape != v.shape:
            raise ParameterError("endpoint arrays differ in length")
        if u.size and (min(u.min(), v.min()) < 0 or max(u.max(), v.max()) >= n):
            raise ParameterError("edge endpoint out of range")
        keep = u != v
        lo = np.minimum(u[keep], v[keep])
        hi = np.maximum(u[keep], v[keep])
        keys = np.unique(lo * n + hi)
        lo, hi = keys // n, keys % n
        rows = np.concatenate([lo, hi])
        cols = np.concatenate([hi, lo])
        order = np.lexsort((cols, rows))
        indices = cols[order].astype(np.int64)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])
        if labels is not None:
            labels = _readonly(np.asarray(labels, dtype=np.int64).copy())
            if labels.shape != (n,):
                raise ParameterError("labels must have one entry per vertex")
        return cls(_readonly(indptr), _readonly(indices), labels)

    @property
    def n_vertices(self) -> int:
        return len(self.indptr) - 1

    @property
    def n_edges(self) -> int:
        return len(self.indices) // 2

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def _check(self, v):
        if not 0 <= v < self.n_vertices:
            raise IndexError(f"vertex {v} out of range [0, {self.n_vertices})")

    def degree(self, v: int) -> int:
        self._check(v)
        return int(self.indptr[v + 1] - self.indptr[v])

    def neighbors(self, v: int) -> np.ndarray:
        """Sorted neighbor ids of ``v`` (a read-only view)."""
        self._check(v)
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def edges(self) -> np.ndarray:
        """``(n_edges, 2)`` array of pairs ``u < v`` in lexicographic order."""
        rows = np.repeat(np.arange(self.n_vertices), self.degrees())
        mask = rows < self.indices
        return np.column_stack([rows[mask], self.indices[mask]])

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return (np.array_equal(self.indptr, other.indptr)
                and np.array_equal(self.indices, other.indices))

    __hash__ = None

    def __repr__(self):
        return f"Graph(n_vertices={self.n_vertices}, n_edges={self.n_edges})"


def degree(g: Graph, v: int) -> int:
    return g.degree(v)


def neighbors(g: Graph, v: int) -> np.ndarray:
    return g.neighbors(v)


# ---------------------------------------------------------------------------
# generators

@dataclass(frozen=True)
class GeneratorSpec:
    """Recipe for an initial topology.

    ``kind`` is one of ``"sf"``, ``"sw"``, ``"nve"`` or ``"edgelist"``; the
    keyword fields that matter depend on the kind.
    """

    kind: str
    n_vertices: int = 0
    seed: int = 0
    m: int = 5
    k: int = 20
    p: float = 0.2
    nve_mu: float = 2.0
    nve_sigma: float = 0.5
    path: str | None = None

    def __post_init__(self):
        kind = self.kind.lower()
        object.__setattr__(self, "kind", kind)
        n = self.n_vertices
        if kind == "sf":
            _check_sf(n, self.m)
        elif kind == "sw":
            _check_sw(n, self.k, self.p)
        elif kind == "nve":
            _check_nve(n, self.nve_sigma)
        elif kind == "edgelist":
            if not self.path:
                raise ParameterError("edgelist generator needs a path")
        else:
            raise ParameterError(f"unknown generator kind {self.kind!r}")

    def build(self) -> Graph:
        if self.kind == "sf":
            return generate_scale_free(self.n_vertices, self.m, self.seed)
        if self.kind == "sw":
            return generate_small_world(self.n_vertices, self.k, self.p, self.seed)
        if self.kind == "nve":
            return generate_nve(self.n_vertices, self.nve_mu, self.nve_sigma, self.seed)
        return load_edge_list(self.path)

    def describe(self) -> str:
        if self.kind == "sf":
            return f"SF(m={self.m})"
        if self.kind == "sw":
            return f"SW(K={self.k}, p={self.p:g})"
        if self.kind == "nve":
            return f"NVE(mu={self.nve_mu:g}, sigma={self.nve_sigma:g})"
        return f"EdgeList({os.path.basename(self.path)})"


def _check_sf(n, m):
    if not (isinstance(m, (int, np.integer)) and 1 <= m < n):
        raise ParameterError(f"scale-free graph needs 1 <= m < n (got m={m}, n={n})")


def _check_sw(n, k, p):
    if not isinstance(k, (int, np.integer)) or k % 2:
        raise ParameterError(f"small-world K must be an even integer (got K={k})")
    if not 2 <= k < n:
        raise ParameterError(f"small-world graph needs 2 <= K < n (got K={k}, n={n})")
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"rewiring probability must lie in [0, 1] (got {p})")


def _check_nve(n, sigma):
    if n < 2:
        raise ParameterError(f"NVE graph needs n >= 2 (got {n})")
    if not sigma > 0:
        raise ParameterError(f"lognormal sigma must be positive (got {sigma})")


@numba.njit(cache=True)
def _attach(gen, n_seed, increments, src, dst, e, repeated, n_rep, mark):
    # Each arriving vertex v picks increments[v - n_seed] distinct targets
    # with probability proportional to degree (uniform while no edges exist).
    n = n_seed + len(increments)
    chosen = np.empty(max(1, int(increments.max()) if len(increments) else 1),
                      np.int64)
    for v in range(n_seed, n):
        c = increments[v - n_seed]
        k = 0
        while k < c:
            if n_rep == 0:
                t = int(gen.random() * v)
            else:
                t = repeated[int(gen.random() * n_rep)]
            if mark[t] != v:
                mark[t] = v
                chosen[k] = t
                k += 1
        for j in range(c):
            src[e] = chosen[j]
            dst[e] = v
            e += 1
            repeated[n_rep] = chosen[j]
            repeated[n_rep + 1] = v
            n_rep += 2
    return e


def generate_scale_free(n: int, m: int, seed: SeedLike = 0) -> Graph:
    """Barabasi-Albert preferential attachment graph.

    Vertices ``0..m-1`` form a star centred on vertex 0; every later vertex
    attaches to ``m`` distinct earlier vertices chosen with probability
    proportional to degree. The graph has ``m*(n-m) + m - 1`` edges.
    """
    _check_sf(n, m)
    rng = make_rng(seed)
    n_edges = (m - 1) + m * (n - m)
    src = np.empty(n_edges, np.int64)
    dst = np.empty(n_edges, np.int64)
    repeated = np.empty(2 * n_edges, np.int64)
    src[:m - 1] = 0
    dst[:m - 1] = np.arange(1, m)
    repeated[0:2 * (m - 1):2] = 0
    repeated[1:2 * (m - 1):2] = np.arange(1, m)
    increments = np.full(n - m, m, dtype=np.int64)
    mark = np.full(n, -1, dtype=np.int64)
    e = _attach(rng, m, increments, src, dst, m - 1, repeated, 2 * (m - 1), mark)
    assert e == n_edges
    return Graph.from_edges(n, src, dst)


def generate_small_world(n: int, k: int, p: float, seed: SeedLike = 0) -> Graph:
    """Watts-Strogatz graph: ring lattice with ``k/2`` neighbors per side,
    each clockwise edge rewired with probability ``p``.

    Edges are visited layer by layer (offset 1 for every vertex, then
    offset 2, ...). A rewired edge ``(u, u+j)`` becomes ``(u, w)`` with
    ``w`` uniform over vertices that are neither ``u`` nor already adjacent
    to it. The edge count ``n*k/2`` is preserved.
    """
    _check_sw(n, k, p)
    rng = make_rng(seed)
    adj = [set() for _ in range(n)]
    for u in range(n):
        for j in range(1, k // 2 + 1):
            w = (u + j) % n
            adj[u].add(w)
            adj[w].add(u)
    if p > 0:
        for j in range(1, k // 2 + 1):
            for u in range(n):
                if rng.random() >= p:
                    continue
                v = (u + j) % n
                if v not in adj[u] or len(adj[u]) >= n - 1:
                    continue
                while True:
                    w = int(rng.random() * n)
                    if w != u and w not in adj[u]:
                        break
                adj[u].discard(v)
                adj[v].discard(u)
                adj[u].add(w)
                adj[w].add(u)
    pairs = [(u, w) for u in range(n) for w in adj[u] if u < w]
    return Graph.from_edges(n, np.array(pairs, dtype=np.int64).reshape(-1, 2))


def nve_increments(n: int, lognormal_mu: float, lognormal_sigma: float, rng) -> np.ndarray:
    """Edges contributed by vertices ``1..n-1``: lognormal draws rounded
    half-up and clamped to ``[1, current vertex count]``."""
    draws = rng.lognormal(lognormal_mu, lognormal_sigma, size=n - 1)
    c = np.floor(draws + 0.5).astype(np.int64)
    return np.clip(c, 1, np.arange(1, n, dtype=np.int64))


def generate_nve(n: int, lognormal_mu: float, lognormal_sigma: float,
                 seed: SeedLike = 0) -> Graph:
    """Preferential-attachment growth with lognormally distributed increments.

    Growth starts from a single vertex. Vertex ``v`` arrives with
    ``c_v`` new edges (see :func:`nve_increments`), each to a distinct
    existing vertex picked proportionally to degree. All increments are
    drawn before any attachment target.
    """
    _check_nve(n, lognormal_sigma)
    rng = make_rng(seed)
    inc = nve_increments(n, lognormal_mu, lognormal_sigma, rng)
    total = int(inc.sum())
    src = np.empty(total, np.int64)
    dst = np.empty(total, np.int64)
    repeated = np.empty(2 * total, np.int64)
    mark = np.full(n, -1, dtype=np.int64)
    _attach(rng, 1, inc, src, dst, 0, repeated, 0, mark)
    return Graph.from_edges(n, src, dst)


# ---------------------------------------------------------------------------
# edge-list files

COMMENT_PREFIXES = ("#", "%")


def load_edge_list(path) -> Graph:
    """Read a whitespace-separated edge list.

    Lines beginning with ``#`` or ``%`` and blank lines are skipped. Vertex
    ids are relabeled densely in order of first appearance; the original
    ids are kept in ``Graph.labels``. Self-loops and repeated edges are
    dropped.
    """
    ids: dict[int, int] = {}
    src: list[int] = []
    dst: list[int] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s.startswith(COMMENT_PREFIXES):
                continue
            parts = s.split()
            if len(parts) != 2:
                raise EdgeListParseError(
                    f"expected two vertex ids, found {len(parts)} fields", lineno)
            try:
                a, b = int(parts[0]), int(parts[1])
            except ValueError:
                raise EdgeListParseError(f"non-integer vertex id in {s!r}", lineno) from None
            src.append(ids.setdefault(a, len(ids)))
            dst.append(ids.setdefault(b, len(ids)))
    if not src:
        raise EdgeListParseError(f"{path}: no edges found")
    labels = np.fromiter(ids.keys(), dtype=np.int64, count=len(ids))
    return Graph.from_edges(len(ids), src, dst, labels=labels)


def save_edge_list(g: Graph, path) -> None:
    """Write ``"u v"`` lines for each edge with ``u < v``, sorted."""
    e = g.edges()
    with open(path, "w", encoding="utf-8") as fh:
        for u, v in e.tolist():
            fh.write(f"{u} {v}\n")


def relabel(g: Graph, order) -> Graph:
    """Return ``g`` with vertex ``order[i]`` renamed to ``i``."""
    order = np.asarray(order, dtype=np.int64)
    inv = np.empty_like(order)
    inv[order] = np.arange(len(order))
    e = g.edges()
    return Graph.from_edges(g.n_vertices, inv[e[:, 0]], inv[e[:, 1]])


def canonicalize(g: Graph) -> Graph:
    """Relabel ``g`` so that :func:`save_edge_list` followed by
    :func:`load_edge_list` returns it unchanged.

    Vertices are numbered in breadth-first order, starting each component
    from its smallest id and visiting neighbors in ascending id order.
    Isolated vertices cannot be represented in an edge list and are
    rejected.
    """
    deg = g.degrees()
    if np.any(deg == 0):
        raise ParameterError("graph has isolated vertices")
    n = g.n_vertices
    seen = np.zeros(n, dtype=bool)
    order = []
    for root in range(n):
        if seen[root]:
            continue
        seen[root] = True
        head = len(order)
        order.append(root)
        while head < len(order):
            v = order[head]
            head += 1
            for u in g.neighbors(v).tolist():
                if not seen[u]:
                    seen[u] = True
                    order.append(u)
    return relabel(g, order)


def expected_ba_edges(n: int, m: int) -> int:
    return m * (n - m) + m - 1
