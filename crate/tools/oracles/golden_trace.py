"""Independent SplitMix64 + inverse-transform rollout used to freeze the
golden chase trace. Rows are written out by hand from the tilt rule."""

MASK = (1 << 64) - 1


class SplitMix64:
    def __init__(self, seed):
        self.state = seed & MASK

    def next_u64(self):
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
        return z ^ (z >> 31)

    def uniform(self):
        # 53 high bits scaled into [0, 1)
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))


LABELS = ["0", "1", "2", "3", "4", "6", "W"]
RUNS = [0, 1, 2, 3, 4, 6]
ACTIONS = ["ULTRA_DEFENSIVE", "DEFENSIVE", "BALANCED", "AGGRESSIVE", "ULTRA_AGGRESSIVE"]
ROWS = [
    [0.55, 0.30, 0.0, 0.0, 0.075, 0.025, 0.05],
    [0.475, 0.30, 0.0, 0.0, 0.1125, 0.0375, 0.075],
    [0.40, 0.30, 0.0, 0.0, 0.15, 0.05, 0.10],
    [0.25, 0.25, 0.20, 0.0, 0.15, 0.05, 0.10],
    [0.25, 0.30, 0.0, 0.0, 0.225, 0.075, 0.15],
]


def sample(row, u):
    acc = 0.0
    last = 0
    for k, p in enumerate(row):
        if p <= 0:
            continue
        acc += p
        last = k
        if u < acc:
            return k
    return last


def trace(start, seed):
    r, b, w = start
    rng = SplitMix64(seed)
    lines = []
    while r > 0 and b > 0 and w > 0:
        a = (r + 2 * b + w) % 5
        k = sample(ROWS[a], rng.uniform())
        lines.append(f"{r},{b},{w},{ACTIONS[a]},{LABELS[k]}")
        if k == 6:
            w -= 1
        else:
            r = max(0, r - RUNS[k])
        b -= 1
    return "".join(l + "\n" for l in lines)


if __name__ == "__main__":
    import sys
    sys.stdout.write(trace((20, 12, 3), 2024))
