"""Builds analyze_log.jsonl and the expected `cybersim analyze` outputs.

The statistics come from scipy, independently of the Rust implementation.
Run from this directory: python3 make_analyze_fixture.py
"""

import json
import random
import statistics

import numpy as np
from scipy import stats

rng = random.Random(2024)
COHORTS = {"experienced": 7, "novice": 6}
entries = []
clock = 1_700_000_000_000


def record(player, level, run_index, profit, complete):
    months = 60 if complete else 24
    monthly = [0.0] * (months - 1) + [profit]
    accumulated = [0.0] * (months - 1) + [profit]
    return {
        "player_id": player,
        "level": level,
        "run_index": run_index,
        "decision_history": [{"p_alloc": 0.0, "d_alloc": 0.0, "r_alloc": 0.0}] * (months // 12),
        "scenario": {"level": level, "incidents": [], "total_impact": 0.0},
        "monthly_profit": monthly,
        "accumulated_profit": accumulated,
        "complete": complete,
        "seed": run_index,
    }


for cohort, n in COHORTS.items():
    for k in range(n):
        player = f"{cohort[0]}{k + 1:02d}"
        for level in ("one", "two"):
            runs = 2 + rng.randrange(6)
            for idx in range(1, runs + 1):
                clock += 1000
                complete = rng.random() > 0.15 or idx == 1
                profit = rng.randrange(3000, 5200) / 2.0
                entries.append({
                    "schema_version": 1,
                    "cohort": cohort,
                    "practice": False,
                    "logged_at_ms": clock,
                    **record(player, level, idx, profit, complete),
                })
        if k == 0:
            clock += 1000
            entries.append({
                "schema_version": 1,
                "cohort": cohort,
                "practice": True,
                "logged_at_ms": clock,
                **record(player, "one", 99, 9999.0, True),
            })

# A tie on best level-two profit, resolved by the earlier timestamp.
ties = [e for e in entries if e["cohort"] == "novice" and e["level"] == "two" and e["complete"] and not e["practice"]]
best_of = {}
for e in ties:
    best_of.setdefault(e["player_id"], e)
    if e["accumulated_profit"][-1] > best_of[e["player_id"]]["accumulated_profit"][-1]:
        best_of[e["player_id"]] = e
a, b = sorted(best_of)[:2]
top = max(best_of[a]["accumulated_profit"][-1], best_of[b]["accumulated_profit"][-1]) + 100.0
for p in (a, b):
    best_of[p]["monthly_profit"][-1] = top
    best_of[p]["accumulated_profit"][-1] = top

with open("analyze_log.jsonl", "w") as f:
    for e in entries:
        f.write(json.dumps(e, separators=(",", ":")) + "\n")

scored = [e for e in entries if not e["practice"]]
labels = list(COHORTS)


def best_per_player(cohort, level):
    out = {}
    for e in scored:
        if e["cohort"] != cohort or e["level"] != level or not e["complete"]:
            continue
        v, ts = e["accumulated_profit"][-1], e["logged_at_ms"]
        cur = out.get(e["player_id"])
        if cur is None:
            out[e["player_id"]] = [v, ts, 1]
        else:
            cur[2] += 1
            if v > cur[0] or (v == cur[0] and ts < cur[1]):
                cur[0], cur[1] = v, ts
    return dict(sorted(out.items()))


def fmt_stat(s):
    if s is None:
        return "n/a"
    stat, p, df = s
    return f"{stat:.6f} (p = {p:.6f}, df = {df:.6f})" + (" *" if p < 0.05 else "")


lines = ["DATA SUMMARY"]
lines.append(f"{'cohort':<16} {'players':>8} {'runs L1':>10} {'runs L2':>10} {'median L1':>12} {'median L2':>12}")
excl = []
for c in labels:
    runs = [e for e in scored if e["cohort"] == c]
    players = sorted({e["player_id"] for e in runs})
    per = {}
    for lvl in ("one", "two"):
        counts = []
        for p in players:
            mine = [e for e in runs if e["player_id"] == p and e["level"] == lvl]
            if mine:
                counts.append(sum(e["complete"] for e in mine))
        per[lvl] = (sum(counts), statistics.median(counts))
    lines.append(f"{c:<16} {len(players):>8} {per['one'][0]:>10} {per['two'][0]:>10} {per['one'][1]:>12.1f} {per['two'][1]:>12.1f}")
    inc = sum(not e["complete"] for e in runs)
    excl.append(f"{c:<16} {inc} of {len(runs)} runs excluded ({100.0 * inc / len(runs):.1f}%)")
lines += ["", "EXCLUSIONS (incomplete runs)"] + excl
lines += ["", "CORRELATION: number of runs vs best accumulated profit (* p < 0.05)"]
for c in labels:
    for lvl in ("one", "two"):
        b = best_per_player(c, lvl)
        counts = [v[2] for v in b.values()]
        bests = [v[0] for v in b.values()]
        s = None
        if len(b) >= 3 and np.var(counts) > 0 and np.var(bests) > 0:
            r, p = stats.pearsonr(counts, bests)
            s = (r, p, len(b) - 2.0)
        lines.append(f"{c:<16} level {lvl}: r = {fmt_stat(s)}")
lines += ["", f"WELCH T-TEST: best performance, {labels[0]} vs {labels[1]}"]
for lvl in ("one", "two"):
    xa = [v[0] for v in best_per_player(labels[0], lvl).values()]
    xb = [v[0] for v in best_per_player(labels[1], lvl).values()]
    res = stats.ttest_ind(xa, xb, equal_var=False)
    sa, sb = np.var(xa, ddof=1) / len(xa), np.var(xb, ddof=1) / len(xb)
    df = (sa + sb) ** 2 / (sa**2 / (len(xa) - 1) + sb**2 / (len(xb) - 1))
    lines.append(f"level {lvl}: t = {fmt_stat((res.statistic, res.pvalue, df))}")
lines += ["", "RANKING CHANGE level one -> level two (positive = fell)"]
rank_rows = ["cohort,player_id,rank_one,rank_two,change_pct"]
for c in labels:
    one, two = best_per_player(c, "one"), best_per_player(c, "two")
    both = sorted(set(one) & set(two))

    def ranks(b):
        order = sorted(both, key=lambda p: (-b[p][0], b[p][1], p))
        return {p: k + 1 for k, p in enumerate(order)}

    r1, r2 = ranks(one), ranks(two)
    n = len(both)
    changes = sorted(((r1[p], r2[p], p) for p in both))
    k = min(6, n)
    top = sum((b2 - b1) / n * 100.0 for b1, b2, _ in changes[:k]) / k
    direction = "decrease in ranking" if top > 0 else "increase in ranking" if top < 0 else "no change"
    lines.append(f"{c:<16} top {k} mean change {top:+.6f}% ({direction})")
    for b1, b2, p in changes:
        rank_rows.append(f"{c},{p},{b1},{b2},{(b2 - b1) / n * 100.0:.6f}")
practice = sum(e["practice"] for e in entries)
lines += ["", f"{practice} practice runs skipped"]

with open("analyze_report.txt", "w") as f:
    f.write("\n".join(lines) + "\n")
with open("analyze_rank_changes.csv", "w") as f:
    f.write("\n".join(rank_rows) + "\n")

best_rows = ["cohort,level,player_id,best_profit,run_count"]
for c in labels:
    for lvl in ("one", "two"):
        for p, (v, _, cnt) in best_per_player(c, lvl).items():
            best_rows.append(f"{c},{lvl},{p},{v:.6f},{cnt}")
with open("analyze_best_performance.csv", "w") as f:
    f.write("\n".join(best_rows) + "\n")
