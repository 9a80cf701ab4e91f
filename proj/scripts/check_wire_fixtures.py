#!/usr/bin/env python3
"""Regenerate the wire fixtures into a temp dir and byte-compare them with
the checked-in set. Exits non-zero on any drift.

Usage: check_wire_fixtures.py <fixtures/wire dir>
"""

import subprocess
import sys
import tempfile
from pathlib import Path


def main():
    if len(sys.argv) != 2:
        sys.exit("usage: check_wire_fixtures.py <wire fixture dir>")
    committed = Path(sys.argv[1])
    generator = Path(__file__).resolve().parent / "gen_wire_fixtures.py"

    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run(
            [sys.executable, str(generator), tmp],
            check=True,
            stdout=subprocess.DEVNULL,
        )
        fresh = sorted(p.name for p in Path(tmp).glob("*.bin"))
        stored = sorted(p.name for p in committed.glob("*.bin"))
        if fresh != stored:
            sys.exit(f"fixture sets differ: generated {fresh} vs stored {stored}")
        for name in fresh:
            a = (Path(tmp) / name).read_bytes()
            b = (committed / name).read_bytes()
            if a != b:
                sys.exit(f"{name}: stored bytes differ from generator output")
    print(f"{len(fresh)} wire fixtures match the generator")


if __name__ == "__main__":
    main()
