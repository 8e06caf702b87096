"""Fixture: exits nonzero mid-run with a traceback on stderr.

Misbehaves in exactly this one way; the first three asks are conforming.
"""

import json
import random
import sys

init = json.loads(sys.stdin.readline())
rng = random.Random(init["seed"])
lb, ub = init["lb"], init["ub"]
for _ in range(min(3, init["budget"])):
    x = [rng.uniform(lo, hi) for lo, hi in zip(lb, ub)]
    sys.stdout.write(json.dumps({"type": "ask", "x": x}) + "\n")
    sys.stdout.flush()
    sys.stdin.readline()
raise RuntimeError("synthetic candidate failure: population index out of range")
