#!/usr/bin/env python3
"""Builds the 20-record elimination fixture and its expected result.

The expected ids come from a plain scan written here, independent of the C++
filters: keep a record when gain >= epsilon, keep a snapshot record while the
running share of usage (descending freq, ties by created_ord then id) stays at
or below theta, and take the union.

    python3 tests/data/make_elim20.py
"""

import json
import math
import pathlib
import random

EPSILON = 0.5
THETA = 0.8
DIM = 4
OUT = pathlib.Path(__file__).resolve().parent / "elim20"


def unit(rng):
    v = [abs(rng.gauss(0, 1)) + 1e-3 for _ in range(DIM)]
    n = math.sqrt(sum(x * x for x in v))
    return [x / n for x in v]


def write_pool(path, records):
    with open(path, "w", encoding="utf-8") as f:
        f.write(json.dumps({"format": "ier-pool", "version": 1, "dim": DIM, "records": len(records)},
                           separators=(",", ":")) + "\n")
        for r in sorted(records, key=lambda r: (r["created_ord"], r["id"])):
            f.write(json.dumps(r, separators=(",", ":")) + "\n")


def main():
    rng = random.Random(20)
    OUT.mkdir(exist_ok=True)
    # Gains include the exact boundary, negatives and unscored-free values.
    gains = [0.5, 0.49, 0.9, -0.2, 0.75, 0.1, 0.5000001, 0.3, 0.0, 1.0,
             0.62, 0.2, 0.55, -0.5, 0.48, 0.81, 0.05, 0.7, 0.33, 0.95]
    records = []
    for i, g in enumerate(gains):
        records.append({
            "id": f"rec-{i:02d}", "kind": "S2I" if i % 2 == 0 else "I2S",
            "key_text": f"key {i}", "value_text": f"value {i}", "key_embedding": unit(rng),
            "gain": g, "freq": 0, "origin_batch": 1, "origin_task": f"t{i // 4}", "created_ord": i,
        })
    write_pool(OUT / "pool.jsonl", records)

    # Usage snapshot: an older generation whose records saw retrievals (ties on purpose).
    freqs = [9, 0, 4, 4, 1, 7, 0, 2, 4, 1, 3, 0]
    snapshot = []
    for i, fr in enumerate(freqs):
        snapshot.append({
            "id": f"old-{i:02d}", "kind": "I2S" if i % 2 == 0 else "S2I",
            "key_text": f"old key {i}", "value_text": f"old value {i}", "key_embedding": unit(rng),
            "gain": 0.9, "freq": fr, "origin_batch": 0, "origin_task": f"o{i}", "created_ord": 100 + (i * 7) % 12,
        })
    write_pool(OUT / "snapshot.jsonl", snapshot)

    kept = {r["id"] for r in records if r["gain"] >= EPSILON}
    total = sum(r["freq"] for r in snapshot)
    ranked = sorted(snapshot, key=lambda r: (-r["freq"], r["created_ord"], r["id"]))
    running = 0
    for r in ranked:
        running += r["freq"]
        if running / total > THETA:
            break
        kept.add(r["id"])
    with open(OUT / "expected_ids.txt", "w", encoding="utf-8") as f:
        f.write(f"# epsilon={EPSILON} theta={THETA}\n")
        for rid in sorted(kept):
            f.write(rid + "\n")
    print(f"{len(kept)} of {len(records) + len(snapshot)} records retained")


if __name__ == "__main__":
    main()
