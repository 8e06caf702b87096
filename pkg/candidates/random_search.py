"""Reference candidate: uniform random search over the ask/tell line protocol.

Reads one JSON message per line on stdin, writes one per line on stdout:
init -> budget asks -> done. Seeded from the init message so runs are
reproducible. Standard library only.
"""

import json
import random
import sys


def main():
    init = json.loads(sys.stdin.readline())
    if init.get("type") != "init":
        print(f"expected init message, got {init!r}", file=sys.stderr)
        return 1
    rng = random.Random(init["seed"])
    lb, ub = init["lb"], init["ub"]
    remaining = init["budget"]
    best = None
    best_x = None
    while remaining > 0:
        x = [rng.uniform(lo, hi) for lo, hi in zip(lb, ub)]
        sys.stdout.write(json.dumps({"type": "ask", "x": x}) + "\n")
        sys.stdout.flush()
        msg = json.loads(sys.stdin.readline())
        if msg.get("type") != "tell":
            print(f"expected tell message, got {msg!r}", file=sys.stderr)
            return 1
        if best is None or msg["fitness"] < best:
            best = msg["fitness"]
            best_x = x
        remaining = msg["remaining"]
    sys.stdout.write(json.dumps({"type": "done"}) + "\n")
    sys.stdout.flush()
    print(f"best fitness {best} at {best_x}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
