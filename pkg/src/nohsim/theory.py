"""Closed-form results for the online-vertex birth-death chain.

The number of online vertices (or the number of online neighbors of one
vertex, with ``n0`` its initial degree) is a birth-death chain on
``{0, ..., n0}`` with birth rate ``(n0 - m) * lam`` and death rate
``m * mu``. Its stationary law is Binomial(n0, lam / (lam + mu)).

:func:`solve_stationary` works from the rate matrix alone and is kept
independent of the binomial closed form so the two can check each other.
"""

from __future__ import annotations

import csv
import math
import numbers
import sys
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .errors import CapacityError, ParameterError

RATE_MATRIX_CAP = 4096


@dataclass(frozen=True)
class TheoryParams:
    """Initial size ``n0`` (network size or a vertex's initial degree)
    with online rate ``lam`` and hidden rate ``mu``."""

    n0: int
    lam: float
    mu: float

    def __post_init__(self):
        if not isinstance(self.n0, numbers.Integral) or self.n0 < 0:
            raise ParameterError(f"n0 must be a non-negative integer (got {self.n0!r})")
        for name in ("lam", "mu"):
            r = getattr(self, name)
            if not (isinstance(r, numbers.Real) and math.isfinite(r) and r > 0):
                raise ParameterError(f"{name} must be a positive finite rate (got {r!r})")

    @property
    def ratio(self) -> float:
        """``lam / mu``."""
        return self.lam / self.mu

    @property
    def online_probability(self) -> float:
        return self.ratio / (1.0 + self.ratio)


def log_stationary_pmf(p: TheoryParams, n):
    """Natural log of the stationary probability of state ``n``.

    ``n`` may be an integer or an integer array. Computed as
    ``ln C(n0, n) + n ln r - n0 ln(1 + r)`` with ``r = lam / mu`` and
    log-gamma binomial coefficients, so it stays finite for any ``n0``.
    """
    n_arr = np.asarray(n)
    if np.any(n_arr < 0) or np.any(n_arr > p.n0):
        raise ValueError(f"state {n} outside 0..{p.n0}")
    n0 = p.n0
    r = p.ratio
    out = (gammaln(n0 + 1.0) - gammaln(n_arr + 1.0) - gammaln(n0 - n_arr + 1.0)
           + n_arr * math.log(r) - n0 * math.log1p(r))
    return float(out) if np.ndim(out) == 0 else out


def stationary_pmf(p: TheoryParams) -> np.ndarray:
    """Stationary probabilities of states ``0..n0``.

    Values below the smallest subnormal come out as exactly 0; use
    :func:`log_stationary_pmf` for them.
    """
    logp = log_stationary_pmf(p, np.arange(p.n0 + 1))
    probs = np.exp(logp - logp.max())
    return probs / probs.sum()


def expected_size(p: TheoryParams) -> float:
    r = p.ratio
    return p.n0 * r / (1.0 + r)


def variance_size(p: TheoryParams) -> float:
    r = p.ratio
    return p.n0 * r / (1.0 + r) ** 2


def isolation_probability(p: TheoryParams) -> float:
    """Probability that a vertex with initial degree ``n0`` has no online
    neighbor in the stationary regime."""
    return math.exp(-p.n0 * math.log1p(p.ratio))


def rate_matrix(p: TheoryParams, cap: int = RATE_MATRIX_CAP) -> np.ndarray:
    """Dense generator matrix of the chain (rows sum to zero)."""
    if p.n0 > cap:
        raise CapacityError(f"n0={p.n0} exceeds rate-matrix cap {cap}")
    m = np.arange(p.n0 + 1, dtype=np.float64)
    up = (p.n0 - m[:-1]) * p.lam
    down = m[1:] * p.mu
    q = np.diag(up, 1) + np.diag(down, -1)
    q[np.diag_indices_from(q)] = -q.sum(axis=1)
    return q


def solve_stationary(q: np.ndarray) -> np.ndarray:
    """Stationary vector of an irreducible tridiagonal generator.

    Uses the detailed-balance recursion
    ``pi[n+1] = pi[n] * q[n, n+1] / q[n+1, n]`` accumulated in log space,
    then normalizes.
    """
    q = np.asarray(q, dtype=np.float64)
    if q.ndim != 2 or q.shape[0] != q.shape[1]:
        raise ValueError("rate matrix must be square")
    k = q.shape[0]
    if k > 2:
        band = np.triu(q, 2) + np.tril(q, -2)
        if np.any(band != 0):
            raise ValueError("rate matrix is not tridiagonal")
    up = np.diag(q, 1)
    down = np.diag(q, -1)
    if np.any(up <= 0) or np.any(down <= 0):
        raise ValueError("chain is not irreducible: a neighboring rate is zero")
    logpi = np.concatenate([[0.0], np.cumsum(np.log(up) - np.log(down))])
    pi = np.exp(logpi - logpi.max())
    return pi / pi.sum()


def write_pmf_csv(p: TheoryParams, out=None) -> None:
    """Write ``n,prob,log_prob`` rows to a path or text stream (stdout
    by default)."""
    if out is None:
        out = sys.stdout
    if not hasattr(out, "write"):
        with open(out, "w", newline="", encoding="utf-8") as fh:
            return write_pmf_csv(p, fh)
    n = np.arange(p.n0 + 1)
    logp = np.atleast_1d(log_stationary_pmf(p, n))
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["n", "prob", "log_prob"])
    for i, lp in zip(n.tolist(), logp.tolist()):
        w.writerow([i, repr(math.exp(lp)), repr(lp)])


def read_pmf_csv(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    ns, ps, lps = [], [], []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row or row[0].startswith("#") or row[0] == "n":
                continue
            ns.append(int(row[0]))
            ps.append(float(row[1]))
            lps.append(float(row[2]))
    return np.array(ns), np.array(ps), np.array(lps)


def write_rate_matrix_csv(p: TheoryParams, path, cap: int = RATE_MATRIX_CAP) -> None:
    q = rate_matrix(p, cap)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in q.tolist():
            w.writerow([repr(x) for x in row])


def read_rate_matrix_csv(path) -> np.ndarray:
    with open(path, newline="", encoding="utf-8") as fh:
        return np.array([[float(x) for x in row] for row in csv.reader(fh)])
