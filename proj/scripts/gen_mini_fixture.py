#!/usr/bin/env python3
"""Generate fixtures/mini_emer.ndjson, a small all-valid Emercoin dump.

150 registrations followed by 50 updates of the first 50 names, heights
strictly increasing, so every line is accepted. The script recounts the
result independently (line count, distinct names, per-op tallies) and
prints the numbers that the tests pin.
"""

import json
import sys
from pathlib import Path

BASE_TIME = 1500000000  # 2017-07-14 UTC
EXPIRY_DAYS = 36500


def txid(i):
    return f"{i:064x}"


def main():
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("fixtures/mini_emer.ndjson")
    out.parent.mkdir(parents=True, exist_ok=True)

    lines = []
    n = 0
    for i in range(150):
        lines.append(
            {
                "chain": "emercoin",
                "op": "register",
                "name": f"dns:mini{i:03d}.coin",
                "value": f"A=10.1.{i // 256}.{i % 256}",
                "owner": f"EMiniOwner{i % 7}",
                "height": 1000 + i,
                "time": BASE_TIME + i * 3600,
                "txid": txid(n),
                "expiry_days": EXPIRY_DAYS,
            }
        )
        n += 1
    for i in range(50):
        lines.append(
            {
                "chain": "emercoin",
                "op": "update",
                "name": f"dns:mini{i:03d}.coin",
                "value": f"A=10.2.{i // 256}.{i % 256}|TXT=updated",
                "owner": f"EMiniOwner{i % 7}",
                "height": 1200 + i,
                "time": BASE_TIME + (200 + i) * 3600,
                "txid": txid(n),
                "expiry_days": EXPIRY_DAYS,
            }
        )
        n += 1

    with out.open("w") as f:
        for rec in lines:
            f.write(json.dumps(rec, sort_keys=True, separators=(",", ":")) + "\n")

    # Independent recount from the written file.
    text = out.read_text().splitlines()
    names = {json.loads(l)["name"] for l in text if l.strip()}
    ops = [json.loads(l)["op"] for l in text if l.strip()]
    print(f"lines={len(text)} distinct_names={len(names)}")
    print(f"registers={ops.count('register')} updates={ops.count('update')}")
    assert len(text) == 200 and len(names) == 150


if __name__ == "__main__":
    main()
