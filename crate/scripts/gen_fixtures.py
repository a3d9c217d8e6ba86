#!/usr/bin/env python3
"""Regenerate the synthetic fixtures under fixtures/.

All players and statistics are synthetic. The generator is seeded, so
re-running it reproduces the committed files byte for byte.
"""

import csv
import json
import math
import random
from pathlib import Path

OUT = Path(__file__).resolve().parent.parent / "fixtures"

ROLE_BASE = {"bat": 34.0, "wk": 27.0, "ar_fast": 23.0, "ar_spin": 21.0, "fast": 9.0, "spin": 7.0}
ROLE_NAME = {
    "fast": "Fast Bowler",
    "spin": "Spinner",
    "ar_fast": "Pace All-Rounder",
    "ar_spin": "Spin All-Rounder",
    "bat": "Batsman",
    "wk": "Wicket-Keeper",
}

DEFAULTS = {
    "fast": {"average": 8.0, "highest": 30},
    "spin": {"average": 6.0, "highest": 25},
    "ar_fast": {"average": 18.0, "highest": 60},
    "ar_spin": {"average": 16.0, "highest": 55},
    "bat": {"average": 25.0, "highest": 80},
    "wk": {"average": 22.0, "highest": 70},
}

CWC_TEAMS = [
    ("AFG", "Afghanistan", 0.80),
    ("AUS", "Australia", 1.20),
    ("BAN", "Bangladesh", 0.85),
    ("ENG", "England", 1.15),
    ("IND", "India", 1.25),
    ("IRE", "Ireland", 0.65),
    ("NZ", "New Zealand", 1.10),
    ("PAK", "Pakistan", 1.05),
    ("SA", "South Africa", 1.12),
    ("SL", "Sri Lanka", 0.95),
    ("WI", "West Indies", 0.90),
    ("ZIM", "Zimbabwe", 0.62),
]

IPL_TEAMS = [
    ("CSK", "Chennai Super Kings", 1.00),
    ("DC", "Delhi Capitals", 1.10),
    ("KXIP", "Kings XI Punjab", 0.95),
    ("KKR", "Kolkata Knight Riders", 0.85),
    ("MI", "Mumbai Indians", 1.25),
    ("RR", "Rajasthan Royals", 0.95),
    ("RCB", "Royal Challengers Bangalore", 0.92),
    ("SRH", "Sunrisers Hyderabad", 1.05),
]

CWC_ROSTER = [("fast", 4, False), ("spin", 3, False), ("ar_fast", 2, False), ("ar_spin", 2, False), ("bat", 5, False), ("wk", 2, False)]
IPL_ROSTER = [
    ("fast", 3, False), ("spin", 2, False), ("ar_fast", 2, False), ("ar_spin", 2, False), ("bat", 2, False), ("wk", 1, False),
    ("fast", 1, True), ("spin", 1, True), ("ar_fast", 1, True), ("bat", 2, True), ("wk", 1, True),
]


def build(name, teams, roster_shape, seed, t20):
    rng = random.Random(seed)
    strength = {tid: s for tid, _, s in teams}
    teams_json = []
    rows = []
    scale = 0.55 if t20 else 1.0
    for tid, tname, s in teams:
        players = []
        counters = {}
        for role, count, overseas in roster_shape:
            for _ in range(count):
                counters[role] = counters.get(role, 0) + 1
                n = counters[role]
                pid = f"{tid.lower()}-{role.replace('_', '')}-{n:02d}"
                players.append({
                    "id": pid,
                    "name": f"{tname} {ROLE_NAME[role]} {n}",
                    "role": role,
                    "overseas": overseas,
                })
        teams_json.append({"id": tid, "name": tname, "players": players})

        for idx, p in enumerate(players):
            talent = rng.uniform(0.7, 1.3)
            base = ROLE_BASE[p["role"]] * s * talent * scale
            kind = idx % 9
            if kind == 7:
                # debutant: lower-tier aggregates only
                tier = rng.choice(["domestic", "first_class", "reserve", "u19"])
                rows.append(stat_row(rng, p["id"], "*", base * 0.9, tier))
                continue
            if kind == 8 and idx > 9:
                # no history at all; league default applies
                continue
            for oid, _, os in teams:
                if oid == tid:
                    continue
                if rng.random() < 0.12:
                    continue  # never faced this opponent
                factor = 1.0 + 0.6 * (1.0 - os)
                rows.append(stat_row(rng, p["id"], oid, base * factor, "international"))
                if rng.random() < 0.08:
                    rows.append(stat_row(rng, p["id"], oid, base * factor * 1.3, "domestic"))
            rows.append(stat_row(rng, p["id"], "*", base, "international"))

    OUT.mkdir(parents=True, exist_ok=True)
    with open(OUT / f"{name}_stats.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["player_id", "opponent_id", "average", "highest", "innings", "tier"])
        for r in rows:
            w.writerow(r)
    with open(OUT / f"{name}_teams.json", "w") as fh:
        json.dump(teams_json, fh, indent=2)
        fh.write("\n")


def stat_row(rng, pid, oid, mean, tier):
    average = round(max(mean * rng.uniform(0.85, 1.15), 0.5), 2)
    highest = math.ceil(average * rng.uniform(1.6, 3.2))
    innings = rng.randint(3, 30)
    return [pid, oid, f"{average:.2f}", highest, innings, tier]


def main():
    build("cwc12", CWC_TEAMS, CWC_ROSTER, 2023, t20=False)
    build("ipl8", IPL_TEAMS, IPL_ROSTER, 2020, t20=True)
    with open(OUT / "defaults.json", "w") as fh:
        json.dump(DEFAULTS, fh, indent=2)
        fh.write("\n")


if __name__ == "__main__":
    main()
