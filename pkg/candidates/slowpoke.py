"""Fixture: reads init, then sleeps far past any configured timeout.

Misbehaves in exactly this one way; never asks, never answers.
"""

import json
import sys
import time

init = json.loads(sys.stdin.readline())
time.sleep(3600)
sys.stdout.write(json.dumps({"type": "done"}) + "\n")
