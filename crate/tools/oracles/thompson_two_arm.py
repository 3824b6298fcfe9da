"""P(select A) for Thompson sampling with A = 9/10 successes, B = 1/10.

Posterior draws: A ~ Beta(10, 2), B ~ Beta(2, 10). Computed two ways:
numerical integration of P(X > Y) and a 10^7-draw Monte Carlo.
"""
import numpy as np
from scipy import integrate, stats

a = stats.beta(10, 2)
b = stats.beta(2, 10)
exact, _ = integrate.quad(lambda x: a.pdf(x) * b.cdf(x), 0.0, 1.0, epsabs=1e-14)
rng = np.random.default_rng(20240601)
n = 10_000_000
mc = np.mean(rng.beta(10, 2, n) > rng.beta(2, 10, n))
print(f"integral={exact:.10f} monte_carlo={mc:.6f}")
