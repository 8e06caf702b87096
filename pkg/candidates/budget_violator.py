"""Fixture: violates the contract by asking budget + 1 times.

Misbehaves in exactly this one way; otherwise a conforming random search.
"""

import json
import random
import sys

init = json.loads(sys.stdin.readline())
rng = random.Random(init["seed"])
lb, ub = init["lb"], init["ub"]
for _ in range(init["budget"] + 1):
    x = [rng.uniform(lo, hi) for lo, hi in zip(lb, ub)]
    sys.stdout.write(json.dumps({"type": "ask", "x": x}) + "\n")
    sys.stdout.flush()
    if not sys.stdin.readline():
        sys.exit(0)  # harness hung up, as expected on the violation
sys.stdout.write(json.dumps({"type": "done"}) + "\n")
sys.stdout.flush()
