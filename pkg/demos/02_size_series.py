"""Simulated network size against its stationary law.

Every vertex starts online, so the size relaxes from n0 towards
n0 * lam / (lam + mu) within a few multiples of 1 / (lam + mu).
"""
import numpy as np

from nohsim.graph import generate_small_world
from nohsim.process import NohParams, NohProcess
from nohsim.stats import Histogram, kl_divergence
from nohsim.theory import TheoryParams, expected_size, stationary_pmf

n0, lam, mu = 2000, 0.01, 0.005
g = generate_small_world(n0, 20, 0.3, seed=1)
proc = NohProcess(g, NohParams(lam, mu), seed=7)

times = np.arange(0, 20_001, 1.0)
sizes = proc.sample_sizes(times)
print(f"{proc.events} transitions simulated")
for t in (0, 100, 500, 1000, 5000, 20_000):
    print(f"t={t:6d}  online={sizes[t]}")

window = sizes[10_000:]
print(f"window mean {window.mean():.1f}, expected {expected_size(TheoryParams(n0, lam, mu)):.1f}")

# The empirical histogram over [1e4, 2e4] is close to the binomial law;
# successive samples are correlated so one run is still a bit noisy.
pmf = stationary_pmf(TheoryParams(n0, lam, mu))
print(f"KL(theory || one run) = {kl_divergence(pmf, Histogram.from_samples(window)):.4f}")
