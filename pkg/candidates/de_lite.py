"""Reference candidate: small differential evolution over the line protocol.

rand/1/bin with clipping, plain lists, standard library only. Stops the
moment the harness reports zero remaining evaluations and sends done.
"""

import json
import random
import sys

F_WEIGHT = 0.5
CROSSOVER = 0.9
POP_FACTOR = 5  # population = min(POP_FACTOR * dim, budget // 4), at least 4


class Session:
    def __init__(self):
        init = json.loads(sys.stdin.readline())
        if init.get("type") != "init":
            raise RuntimeError(f"expected init message, got {init!r}")
        self.rng = random.Random(init["seed"])
        self.lb = init["lb"]
        self.ub = init["ub"]
        self.dim = init["dim"]
        self.remaining = init["budget"]

    def ask(self, x):
        sys.stdout.write(json.dumps({"type": "ask", "x": x}) + "\n")
        sys.stdout.flush()
        msg = json.loads(sys.stdin.readline())
        if msg.get("type") != "tell":
            raise RuntimeError(f"expected tell message, got {msg!r}")
        self.remaining = msg["remaining"]
        return msg["fitness"]

    def done(self):
        sys.stdout.write(json.dumps({"type": "done"}) + "\n")
        sys.stdout.flush()

    def uniform_point(self):
        return [self.rng.uniform(lo, hi) for lo, hi in zip(self.lb, self.ub)]


def main():
    s = Session()
    pop_size = max(4, min(POP_FACTOR * s.dim, s.remaining // 4))
    pop = []
    fit = []
    while len(pop) < pop_size and s.remaining > 0:
        x = s.uniform_point()
        pop.append(x)
        fit.append(s.ask(x))
    while s.remaining > 0:
        for i in range(len(pop)):
            if s.remaining <= 0:
                break
            r1, r2, r3 = s.rng.sample([j for j in range(len(pop)) if j != i], 3)
            jrand = s.rng.randrange(s.dim)
            trial = []
            for d in range(s.dim):
                if d == jrand or s.rng.random() < CROSSOVER:
                    v = pop[r1][d] + F_WEIGHT * (pop[r2][d] - pop[r3][d])
                else:
                    v = pop[i][d]
                trial.append(min(max(v, s.lb[d]), s.ub[d]))
            f = s.ask(trial)
            if f <= fit[i]:
                pop[i] = trial
                fit[i] = f
    s.done()
    return 0


if __name__ == "__main__":
    sys.exit(main())
