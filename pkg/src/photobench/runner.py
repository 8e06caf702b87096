"""Protocol shim: runs a generated optimizer class against the stdio line
protocol.

Usage: python -m photobench.runner <source.py>

The source file must define a class with ``__init__(self, budget, dim)``
and ``__call__(self, func)``. The shim reads the ``init`` message, builds
a ``func`` whose calls are forwarded as ``ask`` messages (with
``func.bounds.lb`` / ``func.bounds.ub`` attributes), instantiates the
first class defined in the file, calls it, then sends ``done``. Any
exception prints a traceback to stderr and exits nonzero so the harness
classifies the run as crashed.
"""

import json
import re
import sys
import types


def _read_message():
    line = sys.stdin.readline()
    if not line:
        raise RuntimeError("harness closed the protocol stream")
    return json.loads(line)


def _send(obj):
    sys.stdout.write(json.dumps(obj) + "\n")
    sys.stdout.flush()


def main(argv):
    if len(argv) != 2:
        print("usage: python -m photobench.runner <candidate_source.py>", file=sys.stderr)
        return 2
    with open(argv[1], encoding="utf-8") as f:
        source = f.read()

    init = _read_message()
    if init.get("type") != "init":
        raise RuntimeError(f"expected init message, got {init!r}")
    dim = int(init["dim"])
    budget = int(init["budget"])
    lb, ub = init["lb"], init["ub"]
    try:
        import numpy as np
        lb, ub = np.asarray(lb, dtype=float), np.asarray(ub, dtype=float)
    except ImportError:
        pass

    def func(x):
        _send({"type": "ask", "x": [float(v) for v in x]})
        msg = _read_message()
        if msg.get("type") != "tell":
            raise RuntimeError(f"expected tell message, got {msg!r}")
        return msg["fitness"]

    func.bounds = types.SimpleNamespace(lb=lb, ub=ub)
    func.budget = budget
    func.dim = dim
    func.seed = init.get("seed", 0)

    match = re.search(r"^class\s+([A-Za-z_]\w*)", source, re.MULTILINE)
    if match is None:
        raise RuntimeError("candidate source defines no class")
    namespace = {"__name__": "candidate"}
    exec(compile(source, argv[1], "exec"), namespace)
    algorithm = namespace[match.group(1)](budget, dim)
    algorithm(func)
    _send({"type": "done"})
    return 0


if __name__ == "__main__":
    try:
        sys.exit(main(sys.argv))
    except Exception:
        import traceback
        traceback.print_exc()
        sys.exit(1)
