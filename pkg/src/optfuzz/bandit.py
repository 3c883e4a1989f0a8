"""Beta-Bernoulli arm pool over triggering examples.

Each triggering test is an arm whose posterior tracks how often a batch
generated with it as a few-shot example triggers the target optimization.
Every arm that took part in a batch receives that whole batch's counts.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Iterable, Mapping
from dataclasses import dataclass

import numpy as np

from .errors import DuplicateArm, EmptyPool, UnknownArm

# A sampler maps the current posteriors to one draw per arm.
Sampler = Callable[[Mapping[str, "ArmPosterior"]], Mapping[str, float]]


@dataclass
class ArmPosterior:
    test_id: str
    alpha: float = 1.0
    beta: float = 1.0

    @property
    def mean(self) -> float:
        return self.alpha / (self.alpha + self.beta)

    def to_dict(self) -> dict:
        return {"test_id": self.test_id, "alpha": self.alpha, "beta": self.beta}


class ArmPool:
    """Arms for one optimization plus the seeded RNG that drives its draws."""

    def __init__(self, rng_seed: int = 0, max_arms: int | None = None):
        if max_arms is not None and max_arms < 1:
            raise ValueError("max_arms must be positive")
        self.rng_seed = rng_seed
        self.max_arms = max_arms
        self.rng = np.random.default_rng(rng_seed)
        self.arms: dict[str, ArmPosterior] = {}
        self.initial: dict[str, tuple[float, float]] = {}
        self.credited: dict[str, list[int]] = {}
        self.events: list[dict] = []

    def __len__(self):
        return len(self.arms)

    def __contains__(self, test_id):
        return test_id in self.arms

    # -- selection --------------------------------------------------------

    def sample(self) -> dict[str, float]:
        """One Thompson draw per arm, theta = X / (X + Y) with X ~ Gamma(alpha), Y ~ Gamma(beta)."""
        ids = sorted(self.arms)
        a = np.array([self.arms[i].alpha for i in ids])
        b = np.array([self.arms[i].beta for i in ids])
        x = self.rng.standard_gamma(a)
        y = self.rng.standard_gamma(b)
        theta = x / (x + y)
        return dict(zip(ids, theta.tolist()))

    def select(self, n: int, sampler: Sampler | None = None) -> list[str]:
        if not self.arms:
            raise EmptyPool("cannot select from an empty pool")
        if n < 1:
            raise ValueError("n must be >= 1")
        draws = sampler(self.arms) if sampler is not None else self.sample()
        ranked = sorted(self.arms, key=lambda i: (-draws[i], i))
        chosen = ranked[: min(n, len(ranked))]
        self.events.append({"op": "select", "n": n, "ids": chosen})
        return chosen

    def select_random(self, n: int) -> list[str]:
        """Uniform choice without replacement; posteriors are ignored."""
        if not self.arms:
            raise EmptyPool("cannot select from an empty pool")
        if n < 1:
            raise ValueError("n must be >= 1")
        ids = sorted(self.arms)
        picks = self.rng.choice(len(ids), size=min(n, len(ids)), replace=False)
        chosen = [ids[k] for k in picks.tolist()]
        self.events.append({"op": "select_random", "n": n, "ids": chosen})
        return chosen

    # -- mutation ---------------------------------------------------------

    def _require(self, ids: Iterable[str]) -> list[str]:
        ids = list(ids)
        for i in ids:
            if i not in self.arms:
                raise UnknownArm(i)
        return ids

    def update(self, example_ids: Iterable[str], num_trigger: int, num_not_trigger: int) -> None:
        ids = self._require(example_ids)
        if num_trigger < 0 or num_not_trigger < 0:
            raise ValueError("counts must be non-negative")
        for i in ids:
            arm = self.arms[i]
            arm.alpha += num_trigger
            arm.beta += num_not_trigger
            self.credited[i][0] += num_trigger
            self.credited[i][1] += num_not_trigger
        self.events.append({"op": "update", "ids": ids, "trigger": num_trigger, "not_trigger": num_not_trigger})

    def _add(self, test_id: str, alpha: float, beta: float) -> None:
        self.arms[test_id] = ArmPosterior(test_id, alpha, beta)
        self.initial[test_id] = (alpha, beta)
        self.credited[test_id] = [0, 0]

    def admit_new(self, example_ids: Iterable[str], new_ids: Iterable[str]) -> None:
        """Add ``new_ids`` at the mean (alpha, beta) of their parents' current posteriors."""
        parents = self._require(example_ids)
        new_ids = list(new_ids)
        if not new_ids:
            return
        if not parents:
            raise ValueError("admit_new needs at least one parent")
        if len(set(new_ids)) != len(new_ids):
            raise DuplicateArm("duplicate id among new arms")
        for i in new_ids:
            if i in self.arms:
                raise DuplicateArm(i)
        alpha = sum(self.arms[p].alpha for p in parents) / len(parents)
        beta = sum(self.arms[p].beta for p in parents) / len(parents)
        for i in new_ids:
            self._add(i, alpha, beta)
        self.events.append({"op": "admit", "parents": parents, "ids": new_ids, "alpha": alpha, "beta": beta})
        self._evict()

    def seed_arm(self, test_id: str) -> None:
        """Add an arm with the uniform Beta(1, 1) prior."""
        if test_id in self.arms:
            raise DuplicateArm(test_id)
        self._add(test_id, 1.0, 1.0)
        self.events.append({"op": "seed", "ids": [test_id]})
        self._evict()

    def _evict(self) -> None:
        if self.max_arms is None:
            return
        while len(self.arms) > self.max_arms:
            worst = min(self.arms, key=lambda i: (self.arms[i].mean, i))
            del self.arms[worst]
            self.events.append({"op": "evict", "ids": [worst]})

    # -- bookkeeping ------------------------------------------------------

    def ledger_ok(self) -> bool:
        """alpha/beta growth of every arm equals the trigger/non-trigger counts credited to it."""
        for i, arm in self.arms.items():
            a0, b0 = self.initial[i]
            ct, cn = self.credited[i]
            if not (math.isclose(arm.alpha - a0, ct, abs_tol=1e-9) and math.isclose(arm.beta - b0, cn, abs_tol=1e-9)):
                return False
        return True

    def state(self) -> dict:
        return {
            "rng_seed": self.rng_seed,
            "max_arms": self.max_arms,
            "rng": self.rng.bit_generator.state,
            "arms": [self.arms[i].to_dict() for i in sorted(self.arms)],
            "initial": {i: list(v) for i, v in sorted(self.initial.items())},
            "credited": {i: list(v) for i, v in sorted(self.credited.items())},
            "events": self.events,
        }

    @classmethod
    def from_state(cls, state: dict) -> "ArmPool":
        pool = cls(state["rng_seed"], state.get("max_arms"))
        pool.rng.bit_generator.state = state["rng"]
        for a in state["arms"]:
            pool.arms[a["test_id"]] = ArmPosterior(a["test_id"], a["alpha"], a["beta"])
        pool.initial = {i: (v[0], v[1]) for i, v in state["initial"].items()}
        pool.credited = {i: list(v) for i, v in state["credited"].items()}
        pool.events = list(state["events"])
        return pool

    @classmethod
    def replay(cls, rng_seed: int, events: Iterable[dict], max_arms: int | None = None) -> "ArmPool":
        """Rebuild a pool by re-executing a logged event sequence.

        Selections are re-drawn from the seeded RNG and checked against the log.
        """
        pool = cls(rng_seed, max_arms)
        for ev in events:
            op = ev["op"]
            if op == "select":
                got = pool.select(ev["n"])
            elif op == "select_random":
                got = pool.select_random(ev["n"])
            elif op == "update":
                pool.update(ev["ids"], ev["trigger"], ev["not_trigger"])
                continue
            elif op == "admit":
                pool.admit_new(ev["parents"], ev["ids"])
                continue
            elif op == "seed":
                pool.seed_arm(ev["ids"][0])
                continue
            elif op == "evict":
                continue  # re-derived by admit/seed
            else:
                raise ValueError(f"unknown pool event {op!r}")
            if got != ev["ids"]:
                raise ValueError(f"replay diverged at {ev}: got {got}")
        return pool


# Functional spellings of the pool operations.


def select(pool: ArmPool, n: int, sampler: Sampler | None = None) -> list[str]:
    return pool.select(n, sampler)


def update(pool: ArmPool, example_ids, num_trigger: int, num_not_trigger: int) -> None:
    pool.update(example_ids, num_trigger, num_not_trigger)


def admit_new(pool: ArmPool, example_ids, new_ids) -> None:
    pool.admit_new(example_ids, new_ids)


def seed_arm(pool: ArmPool, test_id: str) -> None:
    pool.seed_arm(test_id)
