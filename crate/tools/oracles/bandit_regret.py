"""Reference runs for the (0.3, 0.5, 0.7), horizon 10^4 regret ordering.

Independent numpy implementation of UCB1 (bonus sqrt(2 ln t / n)),
Thompson with Beta(1,1) priors and epsilon-greedy(0.1), 100 seeds each.
"""
import numpy as np

means = np.array([0.3, 0.5, 0.7])
T, SEEDS = 10_000, 100

def run(policy, seed):
    rng = np.random.default_rng(seed)
    k = len(means)
    pulls = np.zeros(k); succ = np.zeros(k); regret = 0.0
    for t in range(T):
        if policy == "ucb1":
            if t < k:
                a = t
            else:
                a = int(np.argmax(succ / pulls + np.sqrt(2 * np.log(t) / pulls)))
        elif policy == "thompson":
            a = int(np.argmax(rng.beta(1 + succ, 1 + pulls - succ)))
        else:
            if t < k:
                a = t
            elif rng.random() < 0.1:
                a = int(rng.integers(k))
            else:
                a = int(np.argmax(succ / pulls))
        r = rng.random() < means[a]
        pulls[a] += 1; succ[a] += r
        regret += means.max() - means[a]
    return regret

for p in ("ucb1", "thompson", "egreedy"):
    rs = [run(p, s) for s in range(SEEDS)]
    print(p, f"mean={np.mean(rs):.1f} max={np.max(rs):.1f}")
