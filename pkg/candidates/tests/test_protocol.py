"""Candidate scripts against the harness, through the wire protocol only.

Includes the reference-candidate acceptance check: 100 seeded runs on
mini-bragg at budget 100, all classified ok, trajectories matching the
in-process replay oracle exactly.
"""

import random
import sys
import time
from pathlib import Path


from photobench import sandbox
from photobench.problems import get_instance, instance_objective

SCRIPTS = Path(__file__).parent.parent
PY = sys.executable


def command(name):
    return [PY, str(SCRIPTS / name)]


class TestRandomSearchReference:
    def test_hundred_seeded_runs_match_replay_oracle(self):
        instance = get_instance("mini-bragg").with_budget(100)
        objective = instance_objective(instance)
        lb, ub = instance.lower_bounds, instance.upper_bounds
        start = time.monotonic()
        for seed in range(100):
            res = sandbox.run_candidate(command("random_search.py"), instance,
                                        timeout=30, seed=seed)
            assert res.status == sandbox.STATUS_OK, (seed, res.status, res.stderr_capture)
            assert len(res.trajectory) == instance.budget

            rng = random.Random(seed)
            expected = []
            for _ in range(instance.budget):
                x = [rng.uniform(lo, hi) for lo, hi in zip(lb, ub)]
                expected.append(float(objective(x)))
            assert res.trajectory.raw == expected, f"seed {seed} diverged"
        print(f"\nACCEPTANCE PASS: reference random-search candidate: 100/100 seeded "
              f"runs ok, trajectories equal to the in-process replay oracle "
              f"({time.monotonic() - start:.0f}s)")

    def test_exact_budget_asks_and_seed_determinism(self):
        instance = get_instance("mini-bragg").with_budget(10)
        r1 = sandbox.run_candidate(command("random_search.py"), instance,
                                   timeout=30, seed=7)
        r2 = sandbox.run_candidate(command("random_search.py"), instance,
                                   timeout=30, seed=7)
        assert r1.status == r2.status == sandbox.STATUS_OK
        assert len(r1.trajectory) == 10
        assert r1.trajectory.raw == r2.trajectory.raw


class TestDeLite:
    def test_conforms_and_improves_over_random(self):
        instance = get_instance("mini-bragg").with_budget(300)
        de = sandbox.run_candidate(command("de_lite.py"), instance, timeout=60, seed=3)
        assert de.status == sandbox.STATUS_OK
        assert len(de.trajectory) == 300
        rs = sandbox.run_candidate(command("random_search.py"), instance,
                                   timeout=60, seed=3)
        assert de.trajectory.y_best <= rs.trajectory.y_best

    def test_never_asks_after_exhaustion_across_seeds(self):
        instance = get_instance("ellipsometry").with_budget(40)
        for seed in range(5):
            res = sandbox.run_candidate(command("de_lite.py"), instance,
                                        timeout=60, seed=seed)
            assert res.status == sandbox.STATUS_OK
            assert len(res.trajectory) == 40


class TestMisbehavingFixtures:
    def test_budget_violator(self):
        instance = get_instance("mini-bragg").with_budget(15)
        res = sandbox.run_candidate(command("budget_violator.py"), instance,
                                    timeout=30, seed=0)
        assert res.status == sandbox.STATUS_BUDGET_VIOLATION
        assert len(res.trajectory) == 15

    def test_crasher(self):
        instance = get_instance("mini-bragg").with_budget(15)
        res = sandbox.run_candidate(command("crasher.py"), instance,
                                    timeout=30, seed=0)
        assert res.status == sandbox.STATUS_CRASHED
        assert "RuntimeError" in res.stderr_capture

    def test_slowpoke_times_out_within_grace(self):
        instance = get_instance("mini-bragg").with_budget(15)
        start = time.monotonic()
        res = sandbox.run_candidate(command("slowpoke.py"), instance,
                                    timeout=1.0, seed=0)
        assert res.status == sandbox.STATUS_TIMEOUT
        assert time.monotonic() - start < 6.0
