"""Ball count for the two-type pitch-belief consistency fixture.

Types carry the balanced baseline {0:.40, 1:.30, 4:.15, 6:.05, W:.10}
tilted by 0.5 and 2.0 (boundary and wicket mass scaled, dot ball absorbs).
Every ball is played BALANCED. Starting from a uniform belief, computes the
exact probability that the belief on the true type has reached >= 0.95 at
some ball <= N, by enumerating outcome-count states with absorption.
"""
from collections import defaultdict
import math

def tilt(base, k):
    out = dict(base)
    for o in ("4", "6", "W"):
        out[o] = base[o] * k
    out["0"] = base["0"] - (k - 1) * (base["4"] + base["6"] + base["W"])
    return out

base = {"0": .40, "1": .30, "2": 0.0, "3": 0.0, "4": .15, "6": .05, "W": .10}
types = [tilt(base, 0.5), tilt(base, 2.0)]
outcomes = [o for o in base if base[o] > 0]

def hit_prob(true, n_max):
    other = 1 - true
    # state: log-likelihood ratio (true vs other), keyed by rounded value
    states = {0.0: 1.0}
    hit = 0.0
    curve = []
    for n in range(1, n_max + 1):
        nxt = defaultdict(float)
        for llr, p in states.items():
            for o in outcomes:
                po = types[true][o]
                pn = llr + math.log(po / types[other][o])
                post = 1.0 / (1.0 + math.exp(-pn))
                if post >= 0.95:
                    hit += p * po
                else:
                    nxt[round(pn, 12)] += p * po
        states = nxt
        curve.append(hit)
    return curve

for t in (0, 1):
    c = hit_prob(t, 40)
    print("true", t, " ".join(f"{i+1}:{v:.4f}" for i, v in enumerate(c)))
