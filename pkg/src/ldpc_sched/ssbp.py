"""Schedule search by random transpositions (SSBP) and baseline CN orders."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Literal

import numpy as np

from .de import TauConfig, TauEvaluator
from .decoder import ScheduleSequence
from .graph import TannerGraph


def default_h(n_checks: int) -> int:
    return max(1, int(np.floor(0.005 * n_checks)))


@dataclass(frozen=True)
class SsbpConfig:
    b: int = 100
    big_s: int = 10
    h: int | None = None  # None -> default_h(M)
    iterations: int = 5
    metric: Literal["AE", "GAP"] = "AE"
    seed: int = 0
    reset_on_success: bool = False
    max_evaluations: int | None = None
    prune: bool = True  # abandon AE candidates once their partial sum reaches the incumbent

    def __post_init__(self):
        if self.b < 1:
            raise ValueError("b must be >= 1")
        if self.big_s < 1:
            raise ValueError("big_s must be >= 1")
        if self.h is not None and self.h < 1:
            raise ValueError("h must be >= 1")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.max_evaluations is not None and self.max_evaluations < 1:
            raise ValueError("max_evaluations must be >= 1")

    def swaps(self, n_checks: int) -> int:
        return default_h(n_checks) if self.h is None else self.h


@dataclass
class SsbpTrace:
    rounds: list[int] = field(default_factory=list)
    taus: list[float] = field(default_factory=list)
    accepted: list[bool] = field(default_factory=list)
    evaluations: int = 0
    stop_reason: str = ""

    def add(self, rnd: int, tau: float, accepted: bool):
        self.rounds.append(rnd)
        self.taus.append(float(tau))
        self.accepted.append(bool(accepted))

    def __len__(self):
        return len(self.rounds)

    def to_csv(self) -> str:
        lines = ["round,tau,accepted"]
        lines += [f"{r},{t:.12e},{int(a)}" for r, t, a in zip(self.rounds, self.taus, self.accepted)]
        return "\n".join(lines) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.to_csv())


def exchange(base: ScheduleSequence, h: int, rng: np.random.Generator) -> ScheduleSequence:
    """Apply ``h`` transpositions of two distinct positions to a copy of one iteration."""
    order = base.order.copy()
    m = len(order)
    if m < 2:
        return ScheduleSequence(order, base.iterations)
    for _ in range(h):
        j = int(rng.integers(m))
        k = int(rng.integers(m - 1))
        if k >= j:
            k += 1
        order[j], order[k] = order[k], order[j]
    return ScheduleSequence(order, base.iterations)


# objective(schedule, bound) -> value; may return inf when the value is known to be >= bound
Objective = Callable[[ScheduleSequence, float], float]


def local_search(objective: Objective, init: ScheduleSequence, config: SsbpConfig,
                 h: int, log: Callable[[str], None] | None = None
                 ) -> tuple[ScheduleSequence, SsbpTrace]:
    """The SSBP loop over an arbitrary objective.

    Each round draws ``b`` candidates from the incumbent, scores them, and
    adopts the best one only if it is strictly lower.  The loop ends when
    the failure counter reaches ``big_s`` or the evaluation budget runs out.
    """
    rng = np.random.default_rng(config.seed)
    trace = SsbpTrace()
    best = init
    best_tau = objective(init, np.inf)
    trace.evaluations = 1
    trace.add(0, best_tau, True)
    fails = 0
    rnd = 0
    budget = config.max_evaluations
    while fails < config.big_s:
        if budget is not None and trace.evaluations + config.b > budget:
            trace.stop_reason = "budget"
            break
        rnd += 1
        cands = [exchange(best, h, rng) for _ in range(config.b)]
        win, win_tau = None, best_tau
        for c in cands:
            # candidates must beat the best seen this round, ties keep the earlier one
            t = objective(c, win_tau if config.prune else np.inf)
            trace.evaluations += 1
            if t < win_tau:
                win, win_tau = c, t
        if win is None:
            fails += 1
            trace.add(rnd, best_tau, False)
        else:
            best, best_tau = win, win_tau
            if config.reset_on_success:
                fails = 0
            trace.add(rnd, best_tau, True)
        if log:
            log(f"round {rnd} tau {best_tau:.6f} fails {fails} evals {trace.evaluations}")
    else:
        trace.stop_reason = "failures"
    return best, trace


def ssbp(graph: TannerGraph, channel, init: ScheduleSequence | None = None,
         config: SsbpConfig = SsbpConfig(), log=None) -> tuple[ScheduleSequence, SsbpTrace]:
    """Search for a CN order with low tau.  ``channel``: one LDensity or one per variable."""
    if init is None:
        init = row_order(graph, config.iterations)
    init.check_graph(graph)
    if init.iterations != config.iterations:
        init = init.with_iterations(config.iterations)
    ev = TauEvaluator(graph, channel, TauConfig(config.metric, config.iterations))
    return local_search(ev, init, config, config.swaps(graph.n_checks), log)


# ------------------------------------------------------------------ baselines

def row_order(graph: TannerGraph, iterations: int = 5) -> ScheduleSequence:
    return ScheduleSequence(np.arange(graph.n_checks), iterations)


def random_order(graph: TannerGraph, iterations: int = 5, seed: int = 0) -> ScheduleSequence:
    return ScheduleSequence(np.random.default_rng(seed).permutation(graph.n_checks), iterations)


def lowest_degree(graph: TannerGraph, iterations: int = 5) -> ScheduleSequence:
    """Checks by increasing degree, ties by index."""
    deg = graph.check_degrees()
    return ScheduleSequence(np.lexsort((np.arange(graph.n_checks), deg)), iterations)


def lowest_punctured_highest_degree(graph: TannerGraph, iterations: int = 5) -> ScheduleSequence:
    """Checks touching fewer punctured variables first, then higher degree, then index."""
    mask = graph.punctured_mask()
    punct = np.array([mask[graph.edge_var[graph.check_ptr[a]:graph.check_ptr[a + 1]]].sum()
                      for a in range(graph.n_checks)])
    deg = graph.check_degrees()
    return ScheduleSequence(np.lexsort((np.arange(graph.n_checks), -deg, punct)), iterations)


POLICIES = {
    "row": row_order,
    "lowest-degree": lowest_degree,
    "lphd": lowest_punctured_highest_degree,
    "random": random_order,
}


def policy_schedule(name: str, graph: TannerGraph, iterations: int = 5, seed: int = 0):
    if name not in POLICIES:
        raise ValueError(f"unknown schedule policy {name!r}; choose from {sorted(POLICIES)}")
    if name == "random":
        return random_order(graph, iterations, seed)
    return POLICIES[name](graph, iterations)
