"""Prospect probabilities as utility plus attraction."""

from isingmarket.qdt import ProspectSet, default_attraction, evaluate, frequency_compare

print("default attraction, 2..4 prospects:")
for n in (2, 3, 4):
    print(" ", default_attraction(list(range(n))))

# the safer prospect is less useful but more attractive
ps = ProspectSet.build(["sure gain", "gamble"], [0.4, 0.6], ranking=["sure gain", "gamble"])
res = evaluate(ps)
print("f =", res["f"], " q =", res["q"], " p =", res["p"])
print("chosen:", ps.labels[res["preferred"]])

# compare with 200 hypothetical subjects
cmp = frequency_compare(ps.p, [126, 74])
print(f"chi-square {cmp.chi_square:.3f}, p-value {cmp.p_value:.3f}")

# a prospect whose probability would leave [0, 1] is rejected, not clipped
try:
    ProspectSet.build(["A", "B"], [0.9, 0.1], q=[0.25, -0.25])
except ValueError as exc:
    print("rejected:", exc)
