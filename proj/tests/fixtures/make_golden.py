#!/usr/bin/env python3
"""Independent oracle for the audit golden file.

Computes the summary document of
  splitaudit audit audit20.csv --q-val 0.6 --q-test 0.8 --name audit20
      --generated-at 2024-01-01T00:00:00Z --format json
directly from the metric definitions, without using the library.
"""
import csv
import json
import math
import struct
import sys
from collections import Counter, defaultdict
from pathlib import Path

Q_VAL, Q_TEST = 0.6, 0.8
THRESHOLDS = {  # metric: (warn, alert, high_is_bad)
    "collision_rate_pct": (1.0, 20.0, True),
    "consecutive_repeats_pct": (1.0, 10.0, True),
    "leaked_target_pct": (0.1, 5.0, True),
    "cold_users_pct": (10.0, 50.0, True),
    "cold_items_pct": (5.0, 25.0, True),
    "timegap_ks": (0.1, 0.3, True),
    "position_ks": (0.1, 0.3, True),
    "min_eval_users": (1000.0, 100.0, False),
    "min_eval_interactions": (1000.0, 100.0, False),
}
LINKS = ["core_temporal", "repeats", "leakage", "cold_start", "cold_start", "shift", "shift", "split", "split"]


def load(path):
    with open(path, newline="") as f:
        return [(r["user_id"], r["item_id"], int(r["timestamp"]), i) for i, r in enumerate(csv.DictReader(f))]


def canonical(rows):
    return sorted(rows, key=lambda r: (r[0].encode(), r[2], r[3]))


def by_user(rows):
    out = defaultdict(list)
    for r in canonical(rows):
        out[r[0]].append(r)
    return out


def fingerprint(rows):
    h = 0xCBF29CE484222325
    for u, i, ts, o in canonical(rows):
        for b in u.encode() + b"\x1f" + i.encode() + b"\x1f" + struct.pack("<qQ", ts, o):
            h = ((h ^ b) * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return f"{h:016x}"


def ks(a, b):
    cdf = lambda xs, v: sum(x <= v for x in xs) / len(xs)
    return max(abs(cdf(a, v) - cdf(b, v)) for v in a + b)


def split(rows):
    n = len(rows)
    k_val, k_test = math.ceil(Q_VAL * n - 1e-9), math.ceil(Q_TEST * n - 1e-9)
    timed = sorted(rows, key=lambda r: (r[2], r[3]))
    period = {r: (0 if k < k_val else 1 if k < k_test else 2) for k, r in enumerate(timed)}
    train = [r for r in rows if period[r] == 0]
    warm = {r[1] for r in train}
    evals = {}
    for p in (1, 2):
        inputs, targets = {}, {}
        for u, seq in by_user(rows).items():
            idx = [k for k, r in enumerate(seq) if period[r] == p]
            if not idx:
                continue
            tgt = [r for r in seq[idx[0]:idx[-1] + 1] if r[1] in warm]
            if tgt:
                inputs[u], targets[u] = seq[:idx[0]], tgt
        evals[p] = (inputs, targets)
    return train, evals


def main():
    here = Path(__file__).resolve().parent
    rows = load(here / "audit20.csv")
    seqs = by_user(rows)
    n = len(rows)

    colliding = sum(c for s in seqs.values() for c in Counter(r[2] for r in s).values() if c > 1)
    consecutive = sum(s[k][1] == s[k - 1][1] for s in seqs.values() for k in range(1, len(s)))

    train, evals = split(rows)
    train_max = max(r[2] for r in train)
    train_users, warm = {r[0] for r in train}, {r[1] for r in train}
    inputs, targets = evals[2]
    test_rows = [r for t in targets.values() for r in t]
    test_items = {r[1] for r in test_rows}

    tgt_gaps, tgt_pos = [], []
    for u, tgt in targets.items():
        hist = inputs[u]
        length = len(hist) + len(tgt)
        for k, r in enumerate(tgt):
            if hist:
                tgt_gaps.append(float(r[2] - hist[-1][2]))
            tgt_pos.append((len(hist) + k + 1) / length)
    ref_gaps = [float(s[k][2] - s[k - 1][2]) for s in seqs.values() for k in range(1, len(s))]
    ref_pos = [(k + 1) / len(s) for s in seqs.values() for k in range(len(s))]

    val_targets = evals[1][1]
    values = {
        "collision_rate_pct": 100.0 * colliding / n,
        "consecutive_repeats_pct": 100.0 * consecutive / n,
        "leaked_target_pct": 100.0 * sum(r[2] < train_max for r in test_rows) / len(test_rows),
        "cold_users_pct": 100.0 * sum(u not in train_users for u in targets) / len(targets),
        "cold_items_pct": 100.0 * len(test_items - warm) / len(test_items),
        "timegap_ks": ks(tgt_gaps, ref_gaps) if tgt_gaps else None,
        "position_ks": ks(tgt_pos, ref_pos),
        "min_eval_users": float(min(len(val_targets), len(targets))),
        "min_eval_interactions": float(min(sum(map(len, val_targets.values())), len(test_rows))),
    }

    def status(metric, v):
        if v is None:
            return "not_applicable"
        warn, alert, high_bad = THRESHOLDS[metric]
        if high_bad:
            return "alert" if v >= alert else "warn" if v >= warn else "ok"
        return "alert" if v < alert else "warn" if v < warn else "ok"

    doc = {
        "schema_version": 1,
        "kind": "summary",
        "report": {
            "dataset": "audit20",
            "provenance": {
                "source_name": "audit20",
                "source_id": fingerprint(rows),
                "preprocessing": {"n_core": None, "drop_consecutive_repeats": False, "shuffle_collisions_seed": None},
            },
            "split": {
                "strategy": "global_temporal", "q_val": Q_VAL, "q_test": Q_TEST, "target_mode": "all_items",
                "filter_cold_items": True, "filter_cold_inputs": False, "min_user_length_loo": 3,
            },
            "toolkit_version": sys.argv[1] if len(sys.argv) > 1 else "0.1.0",
            "generated_at": "2024-01-01T00:00:00.000Z",
            "cards": [
                {"metric": m, "value": v, "status": status(m, v), "link": link}
                for (m, v), link in zip(values.items(), LINKS)
            ],
            "notes": [
                "collision rate: percent of interactions whose timestamp equals that of another interaction of the "
                "same user",
                "leakage, cold-start and shift cards read the test side; min_eval cards take the smaller of the "
                "validation and test targets; validation inputs use only the training period",
                "leaked targets: timestamp strictly earlier than the latest training timestamp; shared interactions "
                "and overlap are measured on the target subset",
            ],
        },
    }
    (here / "audit20.summary.json").write_text(json.dumps(doc, indent=2, ensure_ascii=False) + "\n")


if __name__ == "__main__":
    main()
