"""Generates the ball-by-ball golden fixture and a sidecar listing the
imperfections it planted."""

import json
import random
import sys
from pathlib import Path

HEADER = "match_id,innings,over,ball_in_over,batter_id,bowler_id,runs_batter,extras,wicket,dismissal_type"
DISMISSALS = ["caught", "bowled", "lbw", "run out", "stumped"]
RUNS = [0, 1, 2, 3, 4, 6]
WEIGHTS = [38, 32, 7, 1, 12, 5]


def innings(rng, match, inn, overs, target=None):
    rows, total, down, batter = [], 0, 0, 1
    for over in range(overs):
        bowler = f"K{match[-1]}{inn}{over % 5}"
        for ball in range(1, 7):
            wicket = rng.random() < 0.07
            runs = 0 if wicket else rng.choices(RUNS, WEIGHTS)[0]
            extras = 1 if rng.random() < 0.05 else 0
            dismissal = rng.choice(DISMISSALS) if wicket else ""
            rows.append([match, inn, over, ball, f"B{match[-1]}{inn}{batter}", bowler,
                         runs, extras, int(wicket), dismissal])
            total += runs + extras
            if wicket:
                down += 1
                batter += 1
                if down == 10:
                    return rows, total
            if target is not None and total >= target:
                return rows, total
    return rows, total


def line(row):
    return ",".join(str(x) for x in row)


def main(out_dir):
    rng = random.Random(20240611)
    valid = []
    for match, overs in [("M101", 12), ("M102", 10)]:
        first, total = innings(rng, match, 1, overs)
        second, _ = innings(rng, match, 2, overs, target=total + 1)
        valid += first + second

    # Planted imperfections, applied to chosen valid rows.
    wickets = [i for i, r in enumerate(valid) if r[8] == 1]
    blank = wickets[:3]
    for i in blank:
        valid[i][9] = ""
    scoring = [i for i, r in enumerate(valid) if r[8] == 0 and r[6] == 4]
    fives = scoring[:2]
    for i in fives:
        valid[i][6] = 5

    lines = [line(r) for r in valid]
    dups = [10, 57]
    for k, i in enumerate(dups):
        lines.insert(i + 1 + k, lines[i + k])
    bad = [
        (40, "M101,1,6,7,B110,K110,0,0,0,"),
        (90, "M101,2,3,2,B121,K121,9,0,0,"),
        (150, "M102,1,4,1,B211,K211,1"),
        (200, "M102,3,0,1,B231,K231,0,0,0,"),
    ]
    for pos, text in bad:
        lines.insert(pos, text)
    bad_lines = sorted(lines.index(t) + 2 for _, t in bad)

    body = HEADER + "\n" + "".join(l + "\n" for l in lines)
    valid_text = HEADER + "\n" + "".join(l + "\n" for l in lines if l not in [t for _, t in bad])
    out = Path(out_dir)
    (out / "ball_by_ball.csv").write_text(body)
    (out / "ball_by_ball_valid.csv").write_text(valid_text)
    (out / "ball_by_ball_expect.json").write_text(json.dumps({
        "data_rows": len(lines),
        "valid_rows": len(lines) - len(bad),
        "issue_lines": bad_lines,
        "duplicates": len(dups),
        "imputed_dismissals": len(blank),
        "remapped_fives": len(fives),
    }, indent=2) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "crates/core/tests/fixtures")
