"""Random utilities with Gumbel noise: argmax frequencies versus the logit formula."""

import numpy as np

from isingmarket.discrete_choice import (
    ChoiceProblem,
    iia_ratio_check,
    logit_probabilities,
    simulate_choices,
    total_variation,
)

rng = np.random.default_rng(0)

# three alternatives, deterministic utilities 1, 0, -1, noise scale 1
problem = ChoiceProblem([1.0, 0.0, -1.0], gamma=1.0)
closed_form = logit_probabilities(problem)
freqs = simulate_choices(problem, 1_000_000, rng)

print("closed form :", np.round(closed_form, 5))
print("monte carlo :", np.round(freqs, 5))
print("total variation", total_variation(closed_form, freqs))

# the noise scale plays the role of a temperature
for gamma in (0.1, 0.5, 1.0, 5.0):
    p = logit_probabilities(ChoiceProblem([1.0, 0.0, -1.0], gamma))
    print(f"gamma={gamma:4}: {np.round(p, 4)}")

# dropping an alternative keeps the odds between the others (IIA)
print("IIA deviation, subset {0,1}:", iia_ratio_check(closed_form, [0, 1]))
