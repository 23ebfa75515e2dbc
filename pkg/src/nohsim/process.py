"""Event-driven simulation of vertices switching between online and hidden.

Every vertex carries an exponential clock: an online vertex goes hidden at
rate ``mu`` and a hidden vertex comes back online at rate ``lam``. Pending
transitions live in a binary min-heap keyed by ``(time, vertex id)``, so
each event costs ``O(log N)`` and simultaneous events resolve by ascending
vertex id.

Random numbers are consumed in a fixed order: at initialization one
duration per vertex in id order (preceded by one phase draw per vertex when
starting from a random fraction), then exactly one uniform per processed
event. Durations are ``-ln(U) / rate`` with ``U = 1 - random()`` in
``(0, 1]``.
"""

from __future__ import annotations

import csv
import json
import math
import numbers
from dataclasses import dataclass, field

import numba
import numpy as np

from .errors import OrderingError, ParameterError
from .graph import Graph, make_rng

ONLINE = "online"
HIDDEN = "hidden"

OBSERVABLES = frozenset({"size", "online_degrees", "degree_histogram"})


@dataclass(frozen=True)
class NohParams:
    """Online rate ``lam`` (hidden -> online) and hidden rate ``mu``."""

    lam: float
    mu: float

    def __post_init__(self):
        for name in ("lam", "mu"):
            r = getattr(self, name)
            if not (isinstance(r, numbers.Real) and math.isfinite(r) and r > 0):
                raise ParameterError(f"{name} must be a positive finite rate (got {r!r})")

    @property
    def online_probability(self) -> float:
        return self.lam / (self.lam + self.mu)


def sample_duration(phase: str, params: NohParams, rng) -> float:
    """Draw how long a vertex stays in ``phase`` before switching."""
    rate = params.mu if phase == ONLINE else params.lam
    if phase not in (ONLINE, HIDDEN):
        raise ParameterError(f"unknown phase {phase!r}")
    d = -math.log(1.0 - rng.random()) / rate
    return d if d > 0 else math.ulp(0.0)


# ---------------------------------------------------------------------------
# numba kernels

@numba.njit(cache=True, inline="always")
def _less(nt, a, b):
    ta = nt[a]
    tb = nt[b]
    return ta < tb or (ta == tb and a < b)


@numba.njit(cache=True)
def _sift_down(heap, nt, i):
    n = len(heap)
    v = heap[i]
    while True:
        c = 2 * i + 1
        if c >= n:
            break
        if c + 1 < n and _less(nt, heap[c + 1], heap[c]):
            c += 1
        if _less(nt, heap[c], v):
            heap[i] = heap[c]
            i = c
        else:
            break
    heap[i] = v


@numba.njit(cache=True, nogil=True)
def _advance(gen, heap, nt, online, lam, mu, t_end):
    """Process every event with time <= t_end; return (size change, events)."""
    delta = 0
    events = 0
    if len(heap) == 0:
        return delta, events
    while True:
        v = heap[0]
        tv = nt[v]
        if tv > t_end:
            break
        u = 1.0 - gen.random()
        if online[v]:
            online[v] = False
            delta -= 1
            t_new = tv - np.log(u) / lam
        else:
            online[v] = True
            delta += 1
            t_new = tv - np.log(u) / mu
        if t_new <= tv:
            t_new = np.nextafter(tv, np.inf)
        nt[v] = t_new
        _sift_down(heap, nt, 0)
        events += 1
    return delta, events


@numba.njit(cache=True, nogil=True)
def _sample_sizes(gen, heap, nt, online, lam, mu, size0, times, out):
    size = size0
    events = 0
    for j in range(len(times)):
        d, e = _advance(gen, heap, nt, online, lam, mu, times[j])
        size += d
        events += e
        out[j] = size
    return size, events


@numba.njit(cache=True, nogil=True)
def _online_neighbor_counts(indptr, indices, online):
    n = len(indptr) - 1
    out = np.zeros(n, np.int64)
    for v in range(n):
        c = 0
        for k in range(indptr[v], indptr[v + 1]):
            if online[indices[k]]:
                c += 1
        out[v] = c
    return out


# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class OnlineSnapshot:
    """What is observable at time ``t``.

    ``online`` holds the ids of online vertices in ascending order and
    ``online_degree[i]`` the number of online neighbors of ``online[i]``.
    An edge is active when both of its endpoints are online.
    """

    t: float
    online: np.ndarray
    online_degree: np.ndarray
    active_edges: int

    @property
    def size(self) -> int:
        return len(self.online)

    def degree_of(self, v: int) -> int:
        i = np.searchsorted(self.online, v)
        if i == len(self.online) or self.online[i] != v:
            raise KeyError(f"vertex {v} is hidden at t={self.t}")
        return int(self.online_degree[i])

    def to_dict(self) -> dict:
        return {"t": float(self.t), "online": self.online.tolist(),
                "active_edges": int(self.active_edges)}


class NohProcess:
    """Mutable simulation state over a shared, immutable :class:`Graph`.

    Parameters
    ----------
    graph : Graph
        Initial topology; its edges are the only links that can ever be
        active.
    params : NohParams
    seed : int, SeedSequence or Generator
    initial_online : "all" or float
        ``"all"`` starts every vertex online. A float ``q`` puts each vertex
        online independently with probability ``q``.
    """

    def __init__(self, graph: Graph, params: NohParams, seed=0, initial_online="all"):
        if not isinstance(params, NohParams):
            raise ParameterError("params must be a NohParams instance")
        self.graph = graph
        self.params = params
        self.rng = make_rng(seed)
        self.clock = 0.0
        self.events = 0
        n = graph.n_vertices
        lam, mu = params.lam, params.mu
        if isinstance(initial_online, str):
            if initial_online != "all":
                raise ParameterError(f"initial_online must be 'all' or a fraction, "
                                     f"got {initial_online!r}")
            self.online = np.ones(n, dtype=np.bool_)
            u = 1.0 - self.rng.random(n)
            rate = np.full(n, mu)
        else:
            q = float(initial_online)
            if not 0.0 <= q <= 1.0:
                raise ParameterError(f"initial online fraction must lie in [0, 1] (got {q})")
            draws = self.rng.random(2 * n).reshape(n, 2)
            self.online = draws[:, 0] < q
            u = 1.0 - draws[:, 1]
            rate = np.where(self.online, mu, lam)
        dur = -np.log(u) / rate
        dur[dur <= 0] = math.ulp(0.0)
        self.next_transition = dur
        ids = np.arange(n, dtype=np.int64)
        # a sorted array already satisfies the heap property
        self._heap = ids[np.lexsort((ids, dur))]
        self.online_count = int(self.online.sum())

    @property
    def n_vertices(self) -> int:
        return self.graph.n_vertices

    def phase(self, v: int) -> str:
        return ONLINE if self.online[v] else HIDDEN

    def advance_to(self, t: float) -> None:
        """Process all transitions up to and including time ``t``."""
        t = float(t)
        if t < self.clock:
            raise OrderingError(f"cannot advance to t={t} before clock={self.clock}")
        d, e = _advance(self.rng, self._heap, self.next_transition, self.online,
                        self.params.lam, self.params.mu, t)
        self.online_count += d
        self.events += e
        self.clock = t

    def sample_sizes(self, times) -> np.ndarray:
        """Online counts at each of the ascending ``times``."""
        times = _check_times(times, self.clock)
        out = np.empty(len(times), dtype=np.int64)
        if len(times):
            size, e = _sample_sizes(self.rng, self._heap, self.next_transition,
                                    self.online, self.params.lam, self.params.mu,
                                    self.online_count, times, out)
            self.online_count = int(size)
            self.events += e
            self.clock = float(times[-1])
        return out

    def online_neighbor_counts(self) -> np.ndarray:
        """Online-neighbor count of every vertex, hidden ones included."""
        g = self.graph
        return _online_neighbor_counts(g.indptr, g.indices, self.online)

    def snapshot(self) -> OnlineSnapshot:
        ids = np.flatnonzero(self.online)
        deg = self.online_neighbor_counts()[ids]
        return OnlineSnapshot(self.clock, ids, deg, int(deg.sum()) // 2)

    def check_invariants(self) -> None:
        """Full-scan consistency check; raises AssertionError on failure."""
        assert self.online_count == int(self.online.sum())
        assert len(self._heap) == self.n_vertices
        assert np.array_equal(np.sort(self._heap), np.arange(self.n_vertices))
        nt = self.next_transition
        h = self._heap
        for i in range(1, len(h)):
            p = (i - 1) // 2
            a, b = h[p], h[i]
            assert nt[a] < nt[b] or (nt[a] == nt[b] and a < b)
        assert (nt > self.clock).all()


def init(graph, params, seed=0, initial_online="all") -> NohProcess:
    return NohProcess(graph, params, seed=seed, initial_online=initial_online)


def advance_to(proc: NohProcess, t: float) -> None:
    proc.advance_to(t)


def snapshot(proc: NohProcess) -> OnlineSnapshot:
    return proc.snapshot()


def _check_times(times, clock):
    times = np.asarray(times, dtype=np.float64).ravel()
    if len(times):
        if np.any(np.diff(times) < 0):
            raise OrderingError("observation times must be ascending")
        if times[0] < clock:
            raise OrderingError(f"first observation time {times[0]} precedes clock {clock}")
    return times


@dataclass
class SizeSeries:
    """Online network size observed at ascending times, plus optional
    per-time snapshots and degree histograms."""

    t: np.ndarray
    size: np.ndarray
    snapshots: list = field(default=None, repr=False)
    degree_histograms: list = field(default=None, repr=False)

    def __len__(self):
        return len(self.t)

    def window(self, t_lo, t_hi) -> "SizeSeries":
        m = (self.t >= t_lo) & (self.t <= t_hi)
        return SizeSeries(self.t[m], self.size[m])


def run_series(proc: NohProcess, observe_times, observables=("size",)) -> SizeSeries:
    """Advance through ``observe_times`` recording the requested observables.

    ``observables`` is any subset of ``{"size", "online_degrees",
    "degree_histogram"}``; the size is always recorded. Snapshots are
    kept under ``"online_degrees"``.
    """
    obs = set(observables)
    unknown = obs - OBSERVABLES
    if unknown:
        raise ParameterError(f"unknown observables: {sorted(unknown)}")
    times = _check_times(observe_times, proc.clock)
    if obs <= {"size"}:
        return SizeSeries(times, proc.sample_sizes(times))

    from .stats import degree_histogram

    sizes = np.empty(len(times), dtype=np.int64)
    snaps = [] if "online_degrees" in obs else None
    hists = [] if "degree_histogram" in obs else None
    for j, t in enumerate(times):
        proc.advance_to(t)
        sizes[j] = proc.online_count
        snap = proc.snapshot()
        if snaps is not None:
            snaps.append(snap)
        if hists is not None:
            hists.append(degree_histogram(snap) if snap.size else None)
    return SizeSeries(times, sizes, snaps, hists)


def active_subgraph(graph: Graph, snap: OnlineSnapshot) -> Graph:
    """Subgraph induced by the online vertices of ``snap``, relabeled
    ``0..size-1`` in ascending id order."""
    e = graph.edges()
    mask = np.zeros(graph.n_vertices, dtype=np.bool_)
    mask[snap.online] = True
    keep = mask[e[:, 0]] & mask[e[:, 1]]
    new_id = np.cumsum(mask) - 1
    return Graph.from_edges(len(snap.online), new_id[e[keep, 0]], new_id[e[keep, 1]])


# ---------------------------------------------------------------------------
# serialization

def write_size_csv(series: SizeSeries, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "size"])
        for t, s in zip(series.t.tolist(), series.size.tolist()):
            w.writerow([repr(t), s])


def read_size_csv(path) -> SizeSeries:
    with open(path, newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        header = next(r)
        if header != ["t", "size"]:
            raise ValueError(f"unexpected header {header}")
        rows = [(float(a), int(b)) for a, b in r]
    t = np.array([a for a, _ in rows], dtype=np.float64)
    s = np.array([b for _, b in rows], dtype=np.int64)
    return SizeSeries(t, s)


def write_degree_csv(snapshots, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "vertex", "online_degree"])
        for snap in snapshots:
            t = repr(float(snap.t))
            for v, d in zip(snap.online.tolist(), snap.online_degree.tolist()):
                w.writerow([t, v, d])


def read_degree_csv(path) -> list[tuple[float, np.ndarray, np.ndarray]]:
    """Return ``(t, vertices, online_degrees)`` per observation time."""
    out = []
    with open(path, newline="", encoding="utf-8") as fh:
        r = csv.reader(fh)
        header = next(r)
        if header != ["t", "vertex", "online_degree"]:
            raise ValueError(f"unexpected header {header}")
        cur_t, vs, ds = None, [], []
        for a, b, c in r:
            t = float(a)
            if t != cur_t and cur_t is not None:
                out.append((cur_t, np.array(vs, np.int64), np.array(ds, np.int64)))
                vs, ds = [], []
            cur_t = t
            vs.append(int(b))
            ds.append(int(c))
        if cur_t is not None:
            out.append((cur_t, np.array(vs, np.int64), np.array(ds, np.int64)))
    return out


def write_snapshot_json(snap: OnlineSnapshot, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(snap.to_dict(), fh)
        fh.write("\n")


def read_snapshot_json(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
