#!/usr/bin/env python3
"""Recompute segment summary metrics from a cycles.csv and its scenario JSON,
independently of the C++ implementation, and compare against summary.json.

Usage: summary_from_csv.py SCENARIO.json CYCLES.csv SUMMARY.json
Exit status 0 when every metric matches exactly.
"""
import csv
import json
import sys

EPS = 1e-9
BAND = 0.15
WINDOW = 20
UNFUELED = 2


def boundaries(scenario):
    times = []
    for sched in list(scenario["schedules"].values()) + [scenario["reference"]]:
        times += [b["t"] for b in sched if b["t"] > EPS]
    out = []
    for t in sorted(times):
        if not out or t - out[-1] > EPS:
            out.append(t)
    return out


def mean(xs):
    total = 0.0
    for x in xs:
        total += x
    return total / len(xs)


def summarize(rows, bounds):
    groups = [[] for _ in range(len(bounds) + 1)]
    for r in rows:
        if int(r["cycle"]) < UNFUELED:
            continue
        t = float(r["time_s"])
        seg = 0
        while seg < len(bounds) and t > bounds[seg] + EPS:
            seg += 1
        groups[seg].append(r)

    segments = []
    previous_final = None
    for g, grp in enumerate(groups):
        if not grp:
            continue
        y = [float(r["ca50_actual"]) for r in grp]
        err = [float(r["ca50_actual"]) - float(r["ca50_ref"]) for r in grp]
        tail = len(grp) - min(WINDOW, len(grp))
        final = mean(y[tail:])
        settle = 0
        for i in range(len(grp) - 1, -1, -1):
            if abs(y[i] - final) > BAND:
                settle = i + 1
                break
        start = y[0] if previous_final is None else previous_final
        direction = (final > start) - (final < start)
        overshoot = 0.0
        for v in y:
            overshoot = max(overshoot, direction * (v - final))
        segments.append({
            "t_start": 0.0 if g == 0 else bounds[g - 1],
            "t_end": bounds[g] if g < len(bounds) else float(grp[-1]["time_s"]),
            "first_cycle": int(grp[0]["cycle"]),
            "last_cycle": int(grp[-1]["cycle"]),
            "cycles": len(grp),
            "final_value": final,
            "settling_cycles": settle,
            "overshoot": overshoot,
            "ss_error_min": min(err[tail:]),
            "ss_error_max": max(err[tail:]),
            "ss_error_mean": mean(err[tail:]),
            "max_abs_error": max(abs(e) for e in err),
        })
        previous_final = final
    return segments


def main():
    if len(sys.argv) != 4:
        sys.exit(__doc__)
    with open(sys.argv[1]) as f:
        scenario = json.load(f)
    with open(sys.argv[2], newline="") as f:
        rows = list(csv.DictReader(f))
    with open(sys.argv[3]) as f:
        reported = json.load(f)["segments"]

    mine = summarize(rows, boundaries(scenario))
    mismatches = []
    if len(mine) != len(reported):
        mismatches.append(f"segment count {len(mine)} vs {len(reported)}")
    for i, (a, b) in enumerate(zip(mine, reported)):
        for key, value in a.items():
            if b.get(key) != value:
                mismatches.append(f"segment {i} {key}: csv {value!r} vs summary {b.get(key)!r}")
    for m in mismatches:
        print(m)
    print(f"{len(mine)} segments, {len(mismatches)} mismatches")
    return 1 if mismatches else 0


if __name__ == "__main__":
    sys.exit(main())
