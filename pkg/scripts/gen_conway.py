"""Regenerate src/incsnf/data/conway.json (all p^t <= 2^16 with t >= 2)."""

import json
import sys
from pathlib import Path

from incsnf.conway import CONWAY_LIMIT, is_prime, search_conway

OUT = Path(__file__).resolve().parents[1] / "src" / "incsnf" / "data" / "conway.json"


def main():
    table = {}
    for p in range(2, 257):
        if not is_prime(p):
            continue
        t = 2
        while p**t <= CONWAY_LIMIT:
            table[f"{p},{t}"] = list(search_conway(p, t))
            print(p, t, table[f"{p},{t}"], file=sys.stderr, flush=True)
            t += 1
    OUT.write_text(json.dumps(table, indent=0, sort_keys=True) + "\n")


if __name__ == "__main__":
    main()
