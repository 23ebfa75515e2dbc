import heapq
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nohsim.errors import OrderingError, ParameterError
from nohsim.graph import Graph, generate_scale_free, generate_small_world, make_rng
from nohsim.process import (HIDDEN, ONLINE, NohParams, NohProcess, SizeSeries,
                            active_subgraph, read_degree_csv, read_size_csv,
                            read_snapshot_json, run_series, sample_duration,
                            write_degree_csv, write_size_csv, write_snapshot_json)
from nohsim.stats import Histogram, kl_divergence


def path3():
    return Graph.from_edges(3, [0, 1], [1, 2])


def star(k):
    return Graph.from_edges(k + 1, [0] * k, list(range(1, k + 1)))


class ReferenceProcess:
    """Slow pure-Python twin of NohProcess drawing the same random numbers."""

    def __init__(self, n, lam, mu, seed):
        self.rng = make_rng(seed)
        self.lam, self.mu = lam, mu
        self.online = [True] * n
        u = 1.0 - self.rng.random(n)
        self.heap = []
        for v in range(n):
            d = -math.log(u[v]) / mu
            self.heap.append((d if d > 0 else math.ulp(0.0), v))
        heapq.heapify(self.heap)

    def advance_to(self, t_end):
        while self.heap[0][0] <= t_end:
            t, v = self.heap[0]
            u = 1.0 - self.rng.random()
            if self.online[v]:
                self.online[v] = False
                t_new = t - math.log(u) / self.lam
            else:
                self.online[v] = True
                t_new = t - math.log(u) / self.mu
            if t_new <= t:
                t_new = np.nextafter(t, np.inf)
            heapq.heapreplace(self.heap, (t_new, v))


# --- parameters and durations ----------------------------------------------

@pytest.mark.parametrize("lam,mu", [(0.0, 0.1), (0.1, -1.0), (math.inf, 0.1),
                                    (0.1, math.nan), ("0.1", 0.1)])
def test_params_reject_non_positive_or_non_finite(lam, mu):
    with pytest.raises(ParameterError):
        NohParams(lam, mu)


def test_duration_means():
    p = NohParams(0.01, 0.02)
    rng = make_rng(0)
    online = np.array([sample_duration(ONLINE, p, rng) for _ in range(200_000)])
    hidden = np.array([sample_duration(HIDDEN, p, rng) for _ in range(200_000)])
    # standard error of an exponential mean is mean / sqrt(n)
    assert abs(online.mean() - 50) < 4 * 50 / math.sqrt(2e5)
    assert abs(hidden.mean() - 100) < 4 * 100 / math.sqrt(2e5)
    assert online.min() > 0 and hidden.min() > 0


def test_duration_rejects_unknown_phase():
    with pytest.raises(ParameterError):
        sample_duration("asleep", NohParams(1, 1), make_rng(0))


# --- initialization ---------------------------------------------------------

def test_init_all_online():
    g = generate_small_world(50, 4, 0.1, 0)
    proc = NohProcess(g, NohParams(0.01, 0.005), seed=1)
    assert proc.clock == 0.0 and proc.online_count == 50
    assert all(proc.phase(v) == ONLINE for v in range(50))
    assert np.all(proc.next_transition > 0)
    proc.check_invariants()


def test_init_fraction():
    g = generate_small_world(2000, 4, 0.1, 0)
    assert NohProcess(g, NohParams(0.01, 0.005), 1, initial_online=0.0).online_count == 0
    assert NohProcess(g, NohParams(0.01, 0.005), 1, initial_online=1.0).online_count == 2000
    c = NohProcess(g, NohParams(0.01, 0.005), 1, initial_online=0.25).online_count
    assert abs(c - 500) < 4 * math.sqrt(2000 * 0.25 * 0.75)
    with pytest.raises(ParameterError):
        NohProcess(g, NohParams(0.01, 0.005), 1, initial_online=1.5)
    with pytest.raises(ParameterError):
        NohProcess(g, NohParams(0.01, 0.005), 1, initial_online="some")


def test_empty_graph_runs():
    proc = NohProcess(Graph.from_edges(0, []), NohParams(1, 1), 0)
    proc.advance_to(100)
    assert proc.online_count == 0 and proc.events == 0


# --- advancing --------------------------------------------------------------

def test_advance_to_current_clock_is_noop():
    proc = NohProcess(path3(), NohParams(0.5, 0.5), seed=4)
    proc.advance_to(3.0)
    state = (proc.online.copy(), proc.next_transition.copy(), proc.events)
    proc.advance_to(3.0)
    assert np.array_equal(state[0], proc.online)
    assert np.array_equal(state[1], proc.next_transition)
    assert state[2] == proc.events


def test_advance_backwards_fails():
    proc = NohProcess(path3(), NohParams(0.5, 0.5), seed=4)
    proc.advance_to(10.0)
    with pytest.raises(OrderingError):
        proc.advance_to(9.0)
    with pytest.raises(OrderingError):
        proc.sample_sizes([12.0, 11.0])


def test_matches_reference_trajectory():
    g = generate_scale_free(300, 3, seed=0)
    fast = NohProcess(g, NohParams(0.05, 0.08), seed=99)
    slow = ReferenceProcess(300, 0.05, 0.08, seed=99)
    for t in np.linspace(0, 400, 41):
        fast.advance_to(t)
        slow.advance_to(t)
        assert fast.online.tolist() == slow.online
    fast.check_invariants()
    assert sorted(fast.next_transition.tolist()) == sorted(t for t, _ in slow.heap)


def test_simultaneous_events_resolve_by_vertex_id():
    # identical clocks: the kernel must pop vertex 0 before vertex 1
    proc = NohProcess(path3(), NohParams(1.0, 1.0), seed=0)
    proc.next_transition[:] = [5.0, 5.0, 50.0]
    proc._heap[:] = [0, 1, 2]
    proc.check_invariants()
    proc.advance_to(5.0)
    assert proc.online.tolist() == [False, False, True]
    assert proc.events == 2
    proc.check_invariants()


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), lam=st.floats(0.01, 1), mu=st.floats(0.01, 1),
       steps=st.lists(st.floats(0, 30), min_size=1, max_size=8))
def test_online_count_invariant(seed, lam, mu, steps):
    g = generate_small_world(40, 4, 0.3, 1)
    proc = NohProcess(g, NohParams(lam, mu), seed=seed)
    t = 0.0
    for dt in steps:
        t += dt
        proc.advance_to(t)
        proc.check_invariants()
        snap = proc.snapshot()
        assert snap.size == int(proc.online.sum())
        # active edges by brute force
        e = g.edges()
        assert snap.active_edges == int(np.sum(proc.online[e[:, 0]] & proc.online[e[:, 1]]))


def test_sample_sizes_agree_with_stepwise_advance():
    g = generate_small_world(200, 4, 0.2, 3)
    times = np.arange(0, 500, 7.5)
    a = NohProcess(g, NohParams(0.03, 0.02), seed=5)
    b = NohProcess(g, NohParams(0.03, 0.02), seed=5)
    sizes = a.sample_sizes(times)
    stepped = []
    for t in times:
        b.advance_to(t)
        stepped.append(b.online_count)
    assert sizes.tolist() == stepped
    assert a.events == b.events


def test_determinism_and_seed_sensitivity():
    g = generate_scale_free(500, 2, 0)
    runs = []
    for seed in (7, 7, 8):
        proc = NohProcess(g, NohParams(0.01, 0.02), seed=seed)
        runs.append(proc.sample_sizes(np.arange(0, 2000, 10.0)))
    assert np.array_equal(runs[0], runs[1])
    assert not np.array_equal(runs[0], runs[2])


# --- snapshots --------------------------------------------------------------

def test_snapshot_path_with_hidden_middle():
    proc = NohProcess(path3(), NohParams(1.0, 1.0), seed=0)
    proc.online[:] = [True, False, True]
    snap = proc.snapshot()
    assert snap.online.tolist() == [0, 2]
    assert snap.online_degree.tolist() == [0, 0]
    assert snap.active_edges == 0
    with pytest.raises(KeyError):
        snap.degree_of(1)


def test_snapshot_at_time_zero_is_initial_graph():
    g = generate_scale_free(100, 2, 0)
    snap = NohProcess(g, NohParams(0.01, 0.01), seed=0).snapshot()
    assert snap.size == 100 and snap.active_edges == g.n_edges
    assert np.array_equal(snap.online_degree, g.degrees())


def test_active_subgraph():
    g = Graph.from_edges(4, [0, 1, 2, 3], [1, 2, 3, 0])  # 4-cycle
    proc = NohProcess(g, NohParams(1.0, 1.0), seed=0)
    proc.online[:] = [True, True, False, True]
    sub = active_subgraph(g, proc.snapshot())
    assert sub.n_vertices == 3
    assert sub.edges().tolist() == [[0, 1], [0, 2]]


# --- statistical behaviour --------------------------------------------------

def test_marginal_online_fraction():
    g = generate_small_world(1000, 4, 0.1, 0)
    proc = NohProcess(g, NohParams(0.01, 0.03), seed=2)
    sizes = proc.sample_sizes(np.arange(5000, 105_000, 50.0))
    assert abs(sizes.mean() / 1000 - 0.25) < 0.01


def test_symmetric_thousand_vertex_count():
    g = generate_small_world(1000, 4, 0.1, 0)
    proc = NohProcess(g, NohParams(0.005, 0.005), seed=3)
    proc.advance_to(10_000)
    assert abs(proc.online_count - 500) <= 64  # four binomial sd


def test_isolation_is_reachable_and_transient():
    # a star centre with all 5 leaves hidden is isolated; it must happen
    # and also end
    g = star(5)
    proc = NohProcess(g, NohParams(1.0, 1.0), seed=11)
    times = np.arange(0, 2000, 0.25)
    isolated = []
    for t in times:
        proc.advance_to(t)
        isolated.append(not proc.online[1:].any())
    isolated = np.array(isolated)
    assert isolated.any() and not isolated.all()
    assert np.any(isolated[:-1] & ~isolated[1:])


def test_only_ratio_matters_for_stationary_sizes():
    g = generate_small_world(300, 4, 0.1, 0)
    a = NohProcess(g, NohParams(0.01, 0.005), seed=1)
    b = NohProcess(g, NohParams(0.04, 0.02), seed=2)
    ha = Histogram.from_samples(a.sample_sizes(np.arange(2000, 300_000, 5.0)))
    hb = Histogram.from_samples(b.sample_sizes(np.arange(500, 75_000, 1.25)))
    assert kl_divergence(ha, hb) < 0.05
    assert abs(ha.mean() - 200) < 3 and abs(hb.mean() - 200) < 3


# --- series and files -------------------------------------------------------

def test_run_series_observables():
    g = generate_small_world(60, 4, 0.2, 0)
    proc = NohProcess(g, NohParams(0.1, 0.1), seed=0)
    s = run_series(proc, [1.0, 5.0, 9.0], ("size", "online_degrees", "degree_histogram"))
    assert len(s) == 3 and len(s.snapshots) == 3 and len(s.degree_histograms) == 3
    assert s.size.tolist() == [snap.size for snap in s.snapshots]
    with pytest.raises(ParameterError):
        run_series(proc, [10.0], ("size", "entropy"))


def test_size_csv_roundtrip(tmp_path):
    s = SizeSeries(np.array([0.0, 0.1, 1 / 3, 2e4]), np.array([10, 9, 9, 5]))
    write_size_csv(s, tmp_path / "s.csv")
    back = read_size_csv(tmp_path / "s.csv")
    assert np.array_equal(back.t, s.t) and np.array_equal(back.size, s.size)
    assert (tmp_path / "s.csv").read_text().startswith("t,size\n")


def test_degree_csv_and_json_roundtrip(tmp_path):
    g = generate_scale_free(80, 2, 0)
    proc = NohProcess(g, NohParams(0.01, 0.01), seed=0)
    snaps = []
    for t in (50.0, 100.0, 150.5):
        proc.advance_to(t)
        snaps.append(proc.snapshot())
    write_degree_csv(snaps, tmp_path / "d.csv")
    back = read_degree_csv(tmp_path / "d.csv")
    assert [b[0] for b in back] == [50.0, 100.0, 150.5]
    for (t, vs, ds), snap in zip(back, snaps):
        assert np.array_equal(vs, snap.online) and np.array_equal(ds, snap.online_degree)
    write_snapshot_json(snaps[-1], tmp_path / "s.json")
    d = read_snapshot_json(tmp_path / "s.json")
    assert d == snaps[-1].to_dict()
    assert set(d) == {"t", "online", "active_edges"}
    assert json.loads((tmp_path / "s.json").read_text())["t"] == 150.5
