"""Density evolution along a check-node-serial schedule; AE, GAP and tau.

The per-edge state follows the serial decoder: when check ``alpha`` is
processed, every incoming V2C density is rebuilt from the channel density
and the currently stored C2V densities of the other checks, then every
outgoing C2V density is the check-node fold of the other incoming V2C
densities.  Fold orders are fixed (neighbor-list order, left fold) because
the quantized check-node operator is only approximately associative.

``tau`` runs the same recursion in one compiled loop and keeps running
sums of every entropy term, so AE and GAP cost O(degree) per step.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Sequence

import numpy as np
from numba import njit

from .decoder import ScheduleSequence
from .density import (GridSpec, LDensity, _cconv_sd, _from_sd, _to_sd, _vconv_entropy,
                      _vconv_kernel, cconv_fold, check_tables, delta_zero, entropy, vconv,
                      vconv_fold)
from .graph import TannerGraph

Metric = Literal["AE", "GAP"]
Weighting = Literal["nmp-weighted", "per-step"]


@dataclass(frozen=True)
class TauConfig:
    metric: Metric = "AE"
    iterations: int = 5
    weighting: Weighting = "nmp-weighted"

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if self.metric not in ("AE", "GAP"):
            raise ValueError(f"unknown metric {self.metric!r}")
        if self.weighting not in ("nmp-weighted", "per-step"):
            raise ValueError(f"unknown weighting {self.weighting!r}")


@dataclass
class EdgeDensityState:
    graph: TannerGraph
    channel: list[LDensity]
    v2c: list[LDensity]
    c2v: list[LDensity]
    nmp: int = 0

    @classmethod
    def initial(cls, graph: TannerGraph, channel: Sequence[LDensity]) -> "EdgeDensityState":
        channel = _channel_list(graph, channel)
        zero = delta_zero(channel[0].grid)
        return cls(graph, channel, [zero] * graph.n_edges, [zero] * graph.n_edges)

    @property
    def grid(self) -> GridSpec:
        return self.channel[0].grid

    def posterior(self, i: int) -> LDensity:
        g = self.graph
        edges = g.var_edges[g.var_ptr[i]:g.var_ptr[i + 1]]
        return vconv_fold([self.channel[i]] + [self.c2v[e] for e in edges])


def _channel_list(graph, channel):
    if isinstance(channel, LDensity):
        channel = [channel] * graph.n_vars
    channel = list(channel)
    if len(channel) != graph.n_vars:
        raise ValueError(f"need {graph.n_vars} channel densities, got {len(channel)}")
    grids = {c.grid for c in channel}
    if len(grids) != 1:
        raise ValueError("channel densities live on different grids")
    return channel


def de_cn_step(state: EdgeDensityState, alpha: int) -> EdgeDensityState:
    """Process check ``alpha``: refresh its V2C densities, then its C2V densities."""
    g = state.graph
    s, t = int(g.check_ptr[alpha]), int(g.check_ptr[alpha + 1])
    edges = range(s, t)
    for e in edges:
        i = int(g.edge_var[e])
        others = [state.c2v[e2] for e2 in g.var_edges[g.var_ptr[i]:g.var_ptr[i + 1]] if e2 != e]
        state.v2c[e] = vconv_fold([state.channel[i]] + others)
    new = {}
    for e in edges:
        new[e] = cconv_fold([state.v2c[e2] for e2 in edges if e2 != e], state.grid)
    for e, c in new.items():
        state.c2v[e] = c
    state.nmp += 2 * (t - s)
    return state


def average_entropy(state: EdgeDensityState) -> float:
    g = state.graph
    return sum(entropy(state.posterior(i)) for i in range(g.n_vars)) / g.n_vars


def gap(state: EdgeDensityState) -> float:
    g = state.graph
    post = sum(entropy(state.posterior(i)) for i in range(g.n_vars))
    v2c = sum(entropy(c) for c in state.v2c)
    chk = 0.0
    for a in range(g.n_checks):
        s, t = int(g.check_ptr[a]), int(g.check_ptr[a + 1])
        chk += entropy(cconv_fold(state.v2c[s:t], state.grid))
    pair = sum(entropy(vconv(state.v2c[e], state.c2v[e])) for e in range(g.n_edges))
    return -(post + v2c - chk - pair) / g.n_vars


# ---------------------------------------------------------------- compiled tau

@njit(cache=True)
def _cconv_into(p, q, out, table, sat, S1, D1, S2, D2, So, Do, T1, T2, U1, U2):
    _to_sd(p, S1, D1)
    _to_sd(q, S2, D2)
    _cconv_sd(S1, D1, S2, D2, table, sat, So, Do, T1, T2, U1, U2)
    _from_sd(So, Do, out)


@njit(cache=True)
def _tau_kernel(check_ptr, edge_var, var_ptr, var_edges, chan, order, iterations,
                metric_gap, need_gap, per_step, table, sat, w, bound, curve):
    """Returns (tau, steps_done).  Stops early once tau >= bound (AE only)."""
    n, nb = chan.shape
    n_edges = edge_var.shape[0]
    m = check_ptr.shape[0] - 1
    z = (nb - 1) // 2
    h = z + 1
    dmax = 1
    for a in range(m):
        dmax = max(dmax, check_ptr[a + 1] - check_ptr[a])

    v2c = np.zeros((n_edges, nb))
    c2v = np.zeros((n_edges, nb))
    for e in range(n_edges):
        v2c[e, z] = 1.0
        c2v[e, z] = 1.0
    post_h = np.empty(n)
    sum_post = 0.0
    for i in range(n):
        post_h[i] = np.dot(chan[i], w)
        sum_post += post_h[i]
    v2c_h = np.ones(n_edges)
    pair_h = np.ones(n_edges)
    chk_h = np.ones(m)
    sum_v2c = float(n_edges)
    sum_pair = float(n_edges)
    sum_chk = float(m)

    acc = np.empty(nb)
    tmp = np.empty(nb)
    pref = np.empty((dmax + 1, nb))
    S1 = np.empty(h)
    D1 = np.empty(h)
    S2 = np.empty(h)
    D2 = np.empty(h)
    So = np.empty(h)
    Do = np.empty(h)
    T1 = np.empty(h + 1)
    T2 = np.empty(h + 1)
    U1 = np.empty(h + 1)
    U2 = np.empty(h + 1)

    record = curve.shape[0] > 0
    if record:
        curve[0, 0] = 0.0
        curve[0, 1] = sum_post / n
        curve[0, 2] = -(sum_post + sum_v2c - sum_chk - sum_pair) / n
    nmp = 0
    tau = 0.0
    steps = 0
    for it in range(iterations):
        for idx in range(m):
            a = order[idx]
            s = check_ptr[a]
            d = check_ptr[a + 1] - s
            # V2C from channel and the other checks' stored C2V
            for k in range(d):
                e = s + k
                i = edge_var[e]
                acc[:] = chan[i]
                for pe in range(var_ptr[i], var_ptr[i + 1]):
                    e2 = var_edges[pe]
                    if e2 != e:
                        _vconv_kernel(acc, c2v[e2], tmp)
                        acc[:] = tmp
                v2c[s + k] = acc
            # C2V: left folds in neighbor order, sharing prefixes
            top = d if need_gap else d - 1
            if top >= 1:
                pref[1] = v2c[s]
            for k in range(2, top + 1):
                _cconv_into(pref[k - 1], v2c[s + k - 1], pref[k], table, sat,
                            S1, D1, S2, D2, So, Do, T1, T2, U1, U2)
            for k in range(d):
                if d == 1:
                    acc[:] = 0.0
                    acc[nb - 1] = 1.0
                else:
                    if k == 0:
                        acc[:] = v2c[s + 1]
                        nxt = 2
                    else:
                        acc[:] = pref[k]
                        nxt = k + 1
                    for j in range(nxt, d):
                        _cconv_into(acc, v2c[s + j], tmp, table, sat,
                                    S1, D1, S2, D2, So, Do, T1, T2, U1, U2)
                        acc[:] = tmp
                c2v[s + k] = acc
            # entropy bookkeeping
            for k in range(d):
                e = s + k
                i = edge_var[e]
                hp = _vconv_entropy(v2c[e], c2v[e], w)
                sum_post += hp - post_h[i]
                post_h[i] = hp
                if need_gap:
                    hv = np.dot(v2c[e], w)
                    sum_v2c += hv - v2c_h[e]
                    v2c_h[e] = hv
                    sum_pair += hp - pair_h[e]
                    pair_h[e] = hp
            if need_gap:
                hc = np.dot(pref[d], w)
                sum_chk += hc - chk_h[a]
                chk_h[a] = hc
            nmp += 2 * d
            steps += 1
            ae = sum_post / n
            g = -(sum_post + sum_v2c - sum_chk - sum_pair) / n
            val = g if metric_gap else ae
            tau += val * (1.0 if per_step else 2.0 * d)
            if record:
                curve[steps, 0] = nmp
                curve[steps, 1] = ae
                curve[steps, 2] = g if need_gap else np.nan
            if tau >= bound:
                return tau, steps
    return tau, steps


def _channel_array(graph, channel):
    channel = _channel_list(graph, channel)
    return np.ascontiguousarray(np.stack([c.mass for c in channel])), channel[0].grid


class TauEvaluator:
    """Evaluates tau for many schedules of one graph and channel.

    ``bound`` enables early abandonment for the AE metric: evaluation stops
    as soon as the partial sum reaches ``bound`` and ``inf`` is returned.
    That is exact for ranking purposes since AE terms are non-negative.
    """

    def __init__(self, graph: TannerGraph, channel, config: TauConfig = TauConfig()):
        self.graph = graph
        self.config = config
        self.chan, self.grid = _channel_array(graph, channel)
        self.table, self.sat = check_tables(self.grid)
        self.evaluations = 0
        self.steps = 0

    def _run(self, schedule: ScheduleSequence, bound: float, need_gap: bool, curve):
        schedule.check_graph(self.graph)
        if schedule.iterations != self.config.iterations:
            raise ValueError(f"schedule replays {schedule.iterations} iterations, "
                             f"config expects {self.config.iterations}")
        g = self.graph
        tau, steps = _tau_kernel(
            g.check_ptr, g.edge_var, g.var_ptr, g.var_edges, self.chan, schedule.order,
            schedule.iterations, self.config.metric == "GAP", need_gap,
            self.config.weighting == "per-step", self.table, self.sat,
            self.grid.entropy_weights, bound, curve)
        self.evaluations += 1
        self.steps += steps
        return tau, steps

    def __call__(self, schedule: ScheduleSequence, bound: float = np.inf) -> float:
        if self.config.metric == "GAP":
            bound = np.inf
        tau, steps = self._run(schedule, bound, self.config.metric == "GAP", np.empty((0, 3)))
        if steps < schedule.iterations * self.graph.n_checks:
            return np.inf
        return float(tau)

    def curve(self, schedule: ScheduleSequence) -> np.ndarray:
        """Rows ``(nmp, ae, gap)``: the fresh state, then one row per check step."""
        rows = schedule.iterations * self.graph.n_checks + 1
        curve = np.zeros((rows, 3))
        self._run(schedule, np.inf, True, curve)
        return curve


def tau(graph: TannerGraph, channel, schedule: ScheduleSequence,
        config: TauConfig = TauConfig()) -> float:
    """Weighted sum of AE (or GAP) after every check step of ``schedule``."""
    return TauEvaluator(graph, channel, config)(schedule)


def de_curve(graph: TannerGraph, channel, schedule: ScheduleSequence) -> np.ndarray:
    return TauEvaluator(graph, channel, TauConfig(iterations=schedule.iterations)).curve(schedule)


def write_de_curve(path, curves: dict[str, np.ndarray]) -> None:
    """CSV with columns ``schedule_name,nmp,ae,gap``."""
    lines = ["schedule_name,nmp,ae,gap"]
    for name, curve in curves.items():
        lines += [f"{name},{int(r[0])},{r[1]:.12e},{r[2]:.12e}" for r in curve]
    Path(path).write_text("\n".join(lines) + "\n")
