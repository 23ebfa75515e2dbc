"""Stationary number of online vertices.

The count of online vertices is a birth-death chain on 0..n0. Its
stationary law is binomial with success probability lam / (lam + mu), and
we can check that against a direct solve of the rate matrix.
"""
import numpy as np

from nohsim.theory import (TheoryParams, expected_size, isolation_probability,
                           log_stationary_pmf, rate_matrix, solve_stationary,
                           stationary_pmf, variance_size)

p = TheoryParams(n0=40, lam=0.01, mu=0.005)
pi = stationary_pmf(p)
pi_q = solve_stationary(rate_matrix(p))
print("largest disagreement with the rate-matrix solve:", np.abs(pi - pi_q).max())

n = np.arange(p.n0 + 1)
print(f"mean   {n @ pi:.6f}  closed form {expected_size(p):.6f}")
print(f"var    {(n * n) @ pi - (n @ pi) ** 2:.6f}  closed form {variance_size(p):.6f}")

# only the ratio lam / mu matters
faster = TheoryParams(40, 0.1, 0.05)
print("same ratio, 10x rates, max pmf difference:", np.abs(stationary_pmf(faster) - pi).max())

# For big networks most probabilities underflow; work with logs.
big = TheoryParams(334_863, 0.01, 0.013)
logp = log_stationary_pmf(big, np.arange(big.n0 + 1))
mode = int(np.argmax(logp))
print(f"n0={big.n0}: mode {mode}, log pmf there {logp[mode]:.3f}, "
      f"log pmf at 0 {logp[0]:.1f}")

# A vertex of degree k sees each neighbour online with the same
# probability, so it is cut off with probability (1 + lam/mu)^-k.
for k in (1, 5, 10):
    print(f"degree {k:2d}: isolation probability "
          f"{isolation_probability(TheoryParams(k, 0.01, 0.01)):.5f}")
