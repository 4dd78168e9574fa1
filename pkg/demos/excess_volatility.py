"""Variance ordering between prices and fundamental values."""

import numpy as np

from isingmarket.stylized_stats import excess_volatility_diagnostic

rng = np.random.default_rng(3)
n = 1000
base = np.cumsum(rng.standard_normal(n)) * 0.1

# price is the forecast, the fundamental is forecast plus an unforecastable error
res = excess_volatility_diagnostic(base, base + rng.normal(0, 0.5, n))
print("p* = p + eps :", res.ordering_flag.value, round(res.var_p, 3), "<=", round(res.var_pstar, 3))

# price is the fundamental plus noise: too volatile for a rational forecast
res = excess_volatility_diagnostic(base + rng.normal(0, 0.5, n), base)
print("p = p* + eps':", res.ordering_flag.value, round(res.var_p, 3), ">", round(res.var_pstar, 3))
