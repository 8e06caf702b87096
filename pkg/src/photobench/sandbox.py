"""Out-of-process evaluation of candidate optimizers over a line protocol.

The harness launches a candidate as a subprocess and exchanges one JSON
message per line (UTF-8, LF):

  harness -> candidate   {"type": "init", "dim": d, "budget": B,
                          "lb": [...], "ub": [...], "seed": s}
  candidate -> harness   {"type": "ask", "x": [...]}
  harness -> candidate   {"type": "tell", "fitness": f, "remaining": r}
  candidate -> harness   {"type": "done"}

The harness is authoritative for budget accounting: an ask after the
budget is spent terminates the candidate with status ``budget-violation``.
Malformed or out-of-contract messages give ``protocol-error``; wall-clock
overruns give ``timeout``; a nonzero exit before ``done`` gives
``crashed`` with stderr captured. The partial trajectory is preserved in
every case.
"""

from __future__ import annotations

import json
import queue
import subprocess
import threading
import time
from dataclasses import dataclass

from .problems import BoundsError, ProblemInstance, RunTrajectory, make_budgeted

__all__ = [
    "CandidateRunResult",
    "run_candidate",
    "STATUS_OK",
    "STATUS_CRASHED",
    "STATUS_TIMEOUT",
    "STATUS_BUDGET_VIOLATION",
    "STATUS_PROTOCOL_ERROR",
]

STATUS_OK = "ok"
STATUS_CRASHED = "crashed"
STATUS_TIMEOUT = "timeout"
STATUS_BUDGET_VIOLATION = "budget-violation"
STATUS_PROTOCOL_ERROR = "protocol-error"

STDERR_CAP_BYTES = 8192
DEFAULT_TIMEOUT_S = 120.0
_GRACE_S = 5.0


@dataclass
class CandidateRunResult:
    trajectory: RunTrajectory
    status: str
    stderr_capture: str
    wall_time: float

    @property
    def ok(self) -> bool:
        return self.status == STATUS_OK


def _pump_stdout(stream, out_q):
    try:
        for line in stream:
            out_q.put(line)
    except (OSError, ValueError):
        pass
    out_q.put(None)  # EOF marker


def _pump_stderr(stream, sink):
    try:
        for line in stream:
            if sink["size"] < STDERR_CAP_BYTES:
                sink["chunks"].append(line)
                sink["size"] += len(line)
                if sink["size"] >= STDERR_CAP_BYTES:
                    sink["chunks"].append("...[stderr truncated]\n")
            # keep draining so the candidate never blocks on a full pipe
    except (OSError, ValueError):
        pass


def run_candidate(command, instance: ProblemInstance, timeout: float = DEFAULT_TIMEOUT_S,
                  seed: int = 0, objective=None) -> CandidateRunResult:
    """Run one candidate subprocess against one budgeted instance.

    ``command`` is an argv list. ``objective`` overrides the instance
    objective (used by tests); counting stays with the harness either way.
    """
    wrapper = make_budgeted(instance)
    if objective is not None:
        wrapper._fn = objective
    start = time.monotonic()
    try:
        proc = subprocess.Popen(
            command, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
            stderr=subprocess.PIPE, text=True, bufsize=1)
    except OSError as exc:
        raise OSError(f"cannot launch candidate {command!r}: {exc}") from exc

    out_q: queue.Queue = queue.Queue()
    err_sink = {"chunks": [], "size": 0}
    t_out = threading.Thread(target=_pump_stdout, args=(proc.stdout, out_q), daemon=True)
    t_err = threading.Thread(target=_pump_stderr, args=(proc.stderr, err_sink), daemon=True)
    t_out.start()
    t_err.start()

    status = None
    deadline = start + timeout

    def finish(final_status):
        nonlocal status
        status = final_status

    try:
        init = {"type": "init", "dim": instance.dimension, "budget": instance.budget,
                "lb": [float(v) for v in instance.lower_bounds],
                "ub": [float(v) for v in instance.upper_bounds],
                "seed": int(seed)}
        try:
            proc.stdin.write(json.dumps(init) + "\n")
            proc.stdin.flush()
        except (OSError, ValueError):
            pass  # candidate died instantly; classified below

        while status is None:
            budget_left = max(0.0, deadline - time.monotonic())
            if budget_left == 0.0:
                finish(STATUS_TIMEOUT)
                break
            try:
                line = out_q.get(timeout=budget_left)
            except queue.Empty:
                finish(STATUS_TIMEOUT)
                break
            if line is None:  # candidate closed stdout
                try:
                    rc = proc.wait(timeout=_GRACE_S)
                except subprocess.TimeoutExpired:
                    finish(STATUS_TIMEOUT)
                    break
                finish(STATUS_OK if rc == 0 else STATUS_CRASHED)
                break
            line = line.strip()
            if not line:
                continue
            try:
                msg = json.loads(line)
                mtype = msg["type"]
            except (json.JSONDecodeError, TypeError, KeyError):
                finish(STATUS_PROTOCOL_ERROR)
                break
            if mtype == "done":
                finish(STATUS_OK)
                break
            if mtype != "ask":
                finish(STATUS_PROTOCOL_ERROR)
                break
            if wrapper.remaining <= 0:
                finish(STATUS_BUDGET_VIOLATION)
                break
            try:
                fitness = wrapper(msg["x"])
            except (BoundsError, KeyError, TypeError, ValueError):
                finish(STATUS_PROTOCOL_ERROR)
                break
            reply = {"type": "tell", "fitness": fitness, "remaining": wrapper.remaining}
            try:
                proc.stdin.write(json.dumps(reply) + "\n")
                proc.stdin.flush()
            except (OSError, ValueError):
                # candidate went away mid-reply; next loop sees EOF
                continue
    finally:
        if status == STATUS_OK and proc.poll() is None:
            # let a well-behaved candidate flush and exit on its own
            try:
                proc.stdin.close()
            except (OSError, ValueError):
                pass
            try:
                proc.wait(timeout=_GRACE_S)
            except subprocess.TimeoutExpired:
                pass
        if proc.poll() is None:
            proc.kill()
        try:
            proc.wait(timeout=_GRACE_S)
        except subprocess.TimeoutExpired:
            pass
        try:
            proc.stdin.close()
        except (OSError, ValueError):
            pass
        t_out.join(timeout=_GRACE_S)
        t_err.join(timeout=_GRACE_S)

    wall = time.monotonic() - start
    return CandidateRunResult(
        trajectory=wrapper.trajectory,
        status=status if status is not None else STATUS_PROTOCOL_ERROR,
        stderr_capture="".join(err_sink["chunks"]),
        wall_time=wall,
    )
