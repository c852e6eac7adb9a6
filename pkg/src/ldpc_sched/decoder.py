"""Flooding and check-node-serial (layered) sum-product decoding.

Two implementations share one kernel for the check-node rule:

* ``flood_iteration`` / ``serial_cn_step`` operate on a :class:`DecoderState`
  one step at a time and are meant for inspection and tests;
* ``decode`` / ``decode_batch`` run whole decodes in compiled loops.

The check rule ``2 atanh(prod tanh(m/2))`` is evaluated as sign times
``phi(sum phi(|m|))`` with ``phi(x) = -ln tanh(x/2)``; leave-one-out sums use
prefix/suffix accumulation so that no large ``phi`` value is ever subtracted.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Sequence

import numpy as np
from numba import njit

from .graph import TannerGraph

LLR_CAP = 30.0
PHI_CAP = 60.0  # phi(60) ~ 1.7e-26, i.e. a zero-LLR input

Mode = Literal["flooding", "serial"]
StopCheck = Literal["iteration", "step"]


class ScheduleError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ScheduleSequence:
    """One iteration's check order, replayed ``iterations`` times."""

    order: np.ndarray
    iterations: int = 5

    def __post_init__(self):
        order = np.array(self.order, dtype=np.int64).ravel()
        if self.iterations < 1:
            raise ScheduleError("iterations must be >= 1")
        if not np.array_equal(np.sort(order), np.arange(order.size)):
            raise ScheduleError("order must be a permutation of 0..M-1")
        order.setflags(write=False)
        object.__setattr__(self, "order", order)

    def __len__(self):
        return int(self.order.size)

    def __eq__(self, other):
        return (isinstance(other, ScheduleSequence) and self.iterations == other.iterations
                and np.array_equal(self.order, other.order))

    def __hash__(self):
        return hash((self.order.tobytes(), self.iterations))

    def with_iterations(self, iterations: int) -> "ScheduleSequence":
        return ScheduleSequence(self.order, iterations)

    def check_graph(self, graph: TannerGraph) -> None:
        if self.order.size != graph.n_checks:
            raise ScheduleError(
                f"schedule has {self.order.size} checks, graph has {graph.n_checks}")

    def full_sequence(self) -> np.ndarray:
        return np.tile(self.order, self.iterations)

    def dumps(self) -> str:
        return f"{self.order.size} {self.iterations}\n" + " ".join(map(str, self.order.tolist())) + "\n"

    @classmethod
    def loads(cls, text: str) -> "ScheduleSequence":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise ScheduleError("empty schedule file")
        try:
            head = [int(t) for t in lines[0].split()]
            body = [int(t) for ln in lines[1:] for t in ln.split()]
        except ValueError:
            raise ScheduleError("schedule file contains a non-integer token") from None
        if len(head) != 2:
            raise ScheduleError("schedule header must be 'M T'")
        m, t = head
        if len(body) != m:
            raise ScheduleError(f"schedule lists {len(body)} checks, header says {m}")
        return cls(np.array(body, dtype=np.int64), t)

    def save(self, path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def load(cls, path) -> "ScheduleSequence":
        return cls.loads(Path(path).read_text())


@dataclass
class DecoderState:
    channel_llr: np.ndarray
    posterior: np.ndarray
    c2v: np.ndarray
    v2c_scratch: np.ndarray
    nmp: int = 0
    iteration: int = 0

    @classmethod
    def initial(cls, llr, graph: TannerGraph) -> "DecoderState":
        llr = np.asarray(llr, dtype=np.float64)
        if llr.shape != (graph.n_vars,):
            raise ValueError(f"expected {graph.n_vars} LLRs, got shape {llr.shape}")
        return cls(llr.copy(), llr.copy(), np.zeros(graph.n_edges),
                   np.zeros(graph.n_edges))


@dataclass
class DecodeResult:
    success: bool
    hard_bits: np.ndarray
    nmp_used: int
    iterations_used: int
    posterior: np.ndarray
    steps: int = 0
    # rows of (nmp, bit errors on transmitted bits, block error flag), first row before decoding
    trajectory: np.ndarray | None = field(default=None, repr=False)


# ---------------------------------------------------------------- kernels

@njit(cache=True)
def _phi(x):
    if x <= 0.0:
        return PHI_CAP
    if x >= PHI_CAP:
        return 2.0 * np.exp(-x)
    return min(np.log1p(2.0 / np.expm1(x)), PHI_CAP)


@njit(cache=True)
def _check_update(vin, out, pre, suf):
    """Leave-one-out tanh rule over ``vin`` (one check); writes ``out``."""
    d = vin.shape[0]
    if d == 2:
        # single-factor product: the rule is the identity
        out[0] = vin[1]
        out[1] = vin[0]
        return
    neg_total = 0
    for k in range(d):
        if vin[k] < 0.0:
            neg_total += 1
    acc = 0.0
    for k in range(d):
        pre[k] = acc
        acc += _phi(abs(vin[k]))
    acc = 0.0
    for k in range(d - 1, -1, -1):
        suf[k] = acc
        acc += _phi(abs(vin[k]))
    for k in range(d):
        if d == 1:
            mag = LLR_CAP
        else:
            mag = _phi(pre[k] + suf[k])
            if mag > LLR_CAP:
                mag = LLR_CAP
        neg = neg_total - (1 if vin[k] < 0.0 else 0)
        out[k] = -mag if neg % 2 else mag


@njit(cache=True)
def _clip(x):
    if x > LLR_CAP:
        return LLR_CAP
    if x < -LLR_CAP:
        return -LLR_CAP
    return x


@njit(cache=True)
def _serial_step(a, check_ptr, edge_var, post, c2v, vin, vraw, out, pre, suf):
    s = check_ptr[a]
    d = check_ptr[a + 1] - s
    for k in range(d):
        e = s + k
        vraw[k] = post[edge_var[e]] - c2v[e]
        vin[k] = _clip(vraw[k])
    _check_update(vin[:d], out[:d], pre, suf)
    for k in range(d):
        e = s + k
        c2v[e] = out[k]
        post[edge_var[e]] = vraw[k] + out[k]
    return 2 * d


@njit(cache=True)
def _flood(check_ptr, edge_var, llr, post, c2v, vin, out, pre, suf):
    m = check_ptr.shape[0] - 1
    new_c2v = np.empty_like(c2v)
    for a in range(m):
        s = check_ptr[a]
        d = check_ptr[a + 1] - s
        for k in range(d):
            vin[k] = _clip(post[edge_var[s + k]] - c2v[s + k])
        _check_update(vin[:d], out[:d], pre, suf)
        for k in range(d):
            new_c2v[s + k] = out[k]
    c2v[:] = new_c2v
    post[:] = llr
    for e in range(c2v.shape[0]):
        post[edge_var[e]] += c2v[e]
    return 2 * c2v.shape[0]


@njit(cache=True)
def _count_unsat(check_ptr, edge_var, bits):
    m = check_ptr.shape[0] - 1
    unsat = 0
    for a in range(m):
        par = 0
        for e in range(check_ptr[a], check_ptr[a + 1]):
            par ^= bits[edge_var[e]]
        unsat += par
    return unsat


@njit(cache=True)
def _decode_one(llr, check_ptr, edge_var, var_ptr, var_edges, edge_check, order,
                iterations, flooding, stop_step, early_stop, transmitted, record,
                traj, post, c2v, bits, chk_par, vin, vraw, out, pre, suf):
    """Returns (success, nmp, iterations_used, steps, traj_rows)."""
    n = llr.shape[0]
    post[:] = llr
    c2v[:] = 0.0
    for i in range(n):
        bits[i] = 1 if post[i] < 0.0 else 0
    m = check_ptr.shape[0] - 1
    unsat = 0
    for a in range(m):
        par = 0
        for e in range(check_ptr[a], check_ptr[a + 1]):
            par ^= bits[edge_var[e]]
        chk_par[a] = par
        unsat += par
    errs = 0
    any_err = 0
    for i in range(n):
        if bits[i]:
            any_err = 1
            if transmitted[i]:
                errs += 1
    rows = 0
    if record:
        traj[0, 0] = 0
        traj[0, 1] = errs
        traj[0, 2] = any_err
        rows = 1
    nmp = 0
    steps = 0
    it_used = 0
    stopped = False
    for it in range(iterations):
        it_used = it + 1
        if flooding:
            nmp += _flood(check_ptr, edge_var, llr, post, c2v, vin, out, pre, suf)
            steps += m
            unsat = 0
            errs = 0
            any_err = 0
            for i in range(n):
                bits[i] = 1 if post[i] < 0.0 else 0
                if bits[i]:
                    any_err = 1
                    if transmitted[i]:
                        errs += 1
            unsat = _count_unsat(check_ptr, edge_var, bits)
            if record:
                traj[rows, 0] = nmp
                traj[rows, 1] = errs
                traj[rows, 2] = any_err
                rows += 1
        else:
            for idx in range(order.shape[0]):
                a = order[idx]
                nmp += _serial_step(a, check_ptr, edge_var, post, c2v, vin, vraw, out, pre, suf)
                steps += 1
                # incremental syndrome / error bookkeeping for flipped bits
                for e in range(check_ptr[a], check_ptr[a + 1]):
                    i = edge_var[e]
                    nb = 1 if post[i] < 0.0 else 0
                    if nb != bits[i]:
                        bits[i] = nb
                        if transmitted[i]:
                            errs += 1 if nb else -1
                        for pe in range(var_ptr[i], var_ptr[i + 1]):
                            c = edge_check[var_edges[pe]]
                            chk_par[c] ^= 1
                            unsat += 1 if chk_par[c] else -1
                if record:
                    any_err = 0
                    for i in range(n):
                        if bits[i]:
                            any_err = 1
                            break
                    traj[rows, 0] = nmp
                    traj[rows, 1] = errs
                    traj[rows, 2] = any_err
                    rows += 1
                if early_stop and stop_step and unsat == 0:
                    stopped = True
                    break
            if stopped:
                break
        if early_stop and unsat == 0:
            break
    success = unsat == 0
    return success, nmp, it_used, steps, rows


@njit(cache=True)
def _decode_batch(llrs, check_ptr, edge_var, var_ptr, var_edges, edge_check, order,
                  iterations, flooding, stop_step, early_stop, transmitted,
                  nmp_out, biterr_out, blockerr_out, iters_out, success_out):
    n = llrs.shape[1]
    e_count = edge_var.shape[0]
    dmax = 1
    for a in range(check_ptr.shape[0] - 1):
        dmax = max(dmax, check_ptr[a + 1] - check_ptr[a])
    post = np.empty(n)
    c2v = np.empty(e_count)
    bits = np.empty(n, dtype=np.int64)
    chk_par = np.empty(check_ptr.shape[0] - 1, dtype=np.int64)
    vin = np.empty(dmax)
    vraw = np.empty(dmax)
    out = np.empty(dmax)
    pre = np.empty(dmax)
    suf = np.empty(dmax)
    traj = np.empty((1, 3), dtype=np.int64)
    for t in range(llrs.shape[0]):
        ok, nmp, its, _, _ = _decode_one(
            llrs[t], check_ptr, edge_var, var_ptr, var_edges, edge_check, order,
            iterations, flooding, stop_step, early_stop, transmitted, False, traj,
            post, c2v, bits, chk_par, vin, vraw, out, pre, suf)
        errs = 0
        any_err = 0
        for i in range(n):
            if bits[i]:
                any_err = 1
                if transmitted[i]:
                    errs += 1
        nmp_out[t] = nmp
        biterr_out[t] = errs
        blockerr_out[t] = 1 if (any_err or not ok) else 0
        iters_out[t] = its
        success_out[t] = ok


# ---------------------------------------------------------------- step API

def _scratch(graph: TannerGraph):
    d = max(1, int(graph.check_degrees().max(initial=1)))
    return [np.empty(d) for _ in range(5)]


def flood_iteration(state: DecoderState, graph: TannerGraph) -> DecoderState:
    """One flooding iteration: all V2C from the previous C2V, then all C2V."""
    vin, vraw, out, pre, suf = _scratch(graph)
    # V2C messages of this iteration, kept for inspection
    state.v2c_scratch = np.clip(state.posterior[graph.edge_var] - state.c2v, -LLR_CAP, LLR_CAP)
    state.nmp += _flood(graph.check_ptr, graph.edge_var, state.channel_llr, state.posterior,
                        state.c2v, vin, out, pre, suf)
    state.iteration += 1
    return state


def serial_cn_step(state: DecoderState, graph: TannerGraph, alpha: int) -> DecoderState:
    """Layered update of check ``alpha``: V2C = posterior - old C2V, new C2V, new posterior."""
    if not 0 <= alpha < graph.n_checks:
        raise IndexError(f"check {alpha} out of range")
    vin, vraw, out, pre, suf = _scratch(graph)
    s, t = graph.check_ptr[alpha], graph.check_ptr[alpha + 1]
    state.v2c_scratch[s:t] = state.posterior[graph.edge_var[s:t]] - state.c2v[s:t]
    state.nmp += _serial_step(alpha, graph.check_ptr, graph.edge_var, state.posterior,
                              state.c2v, vin, vraw, out, pre, suf)
    return state


def hard_decision(posterior) -> np.ndarray:
    """Bit 0 iff the posterior LLR is >= 0."""
    return (np.asarray(posterior) < 0).astype(np.uint8)


def syndrome_ok(bits, graph: TannerGraph) -> bool:
    bits = np.asarray(bits, dtype=np.int64)
    return _count_unsat(graph.check_ptr, graph.edge_var, bits) == 0


# ---------------------------------------------------------------- full decodes

def _prepare(graph, schedule, mode):
    if schedule is None:
        schedule = ScheduleSequence(np.arange(graph.n_checks))
    schedule.check_graph(graph)
    if mode not in ("flooding", "serial"):
        raise ValueError(f"unknown mode {mode!r}")
    transmitted = (~graph.punctured_mask()).astype(np.int64)
    return schedule, transmitted


def decode(llr, graph: TannerGraph, schedule: ScheduleSequence | None = None,
           mode: Mode = "serial", record_trajectory: bool = False,
           stop_check: StopCheck | None = None, early_stop: bool = True) -> DecodeResult:
    """Decode one LLR vector.

    The syndrome is checked at iteration boundaries, or after every check
    step when ``stop_check='step'``.  ``stop_check`` defaults to ``'step'``
    when a trajectory is recorded and ``'iteration'`` otherwise.
    ``early_stop=False`` runs all ``schedule.iterations`` passes.
    """
    llr = np.asarray(llr, dtype=np.float64)
    if llr.shape != (graph.n_vars,):
        raise ValueError(f"expected {graph.n_vars} LLRs, got shape {llr.shape}")
    schedule, transmitted = _prepare(graph, schedule, mode)
    if stop_check is None:
        stop_check = "step" if record_trajectory else "iteration"
    flooding = mode == "flooding"
    n, e = graph.n_vars, graph.n_edges
    per_iter = 1 if flooding else graph.n_checks
    traj = np.zeros((schedule.iterations * per_iter + 1 if record_trajectory else 1, 3), dtype=np.int64)
    post, c2v = np.empty(n), np.empty(e)
    bits = np.empty(n, dtype=np.int64)
    chk_par = np.empty(graph.n_checks, dtype=np.int64)
    ok, nmp, its, steps, rows = _decode_one(
        llr, graph.check_ptr, graph.edge_var, graph.var_ptr, graph.var_edges, graph.edge_check,
        schedule.order, schedule.iterations, flooding, stop_check == "step", early_stop,
        transmitted, record_trajectory, traj, post, c2v, bits, chk_par, *_scratch(graph))
    return DecodeResult(bool(ok), bits.astype(np.uint8), int(nmp), int(its), post, int(steps),
                        traj[:rows].copy() if record_trajectory else None)


@dataclass
class BatchResult:
    nmp: np.ndarray
    bit_errors: np.ndarray
    block_errors: np.ndarray
    iterations: np.ndarray
    success: np.ndarray


def decode_batch(llrs, graph: TannerGraph, schedule: ScheduleSequence | None = None,
                 mode: Mode = "serial", stop_check: StopCheck = "iteration",
                 early_stop: bool = True) -> BatchResult:
    """Decode each row of ``llrs``; per-trial counters only."""
    llrs = np.ascontiguousarray(llrs, dtype=np.float64)
    if llrs.ndim != 2 or llrs.shape[1] != graph.n_vars:
        raise ValueError(f"llrs must have shape (trials, {graph.n_vars})")
    schedule, transmitted = _prepare(graph, schedule, mode)
    t = llrs.shape[0]
    res = BatchResult(np.zeros(t, np.int64), np.zeros(t, np.int64), np.zeros(t, np.int64),
                      np.zeros(t, np.int64), np.zeros(t, np.bool_))
    _decode_batch(llrs, graph.check_ptr, graph.edge_var, graph.var_ptr, graph.var_edges,
                  graph.edge_check, schedule.order, schedule.iterations, mode == "flooding",
                  stop_check == "step", early_stop, transmitted,
                  res.nmp, res.bit_errors, res.block_errors, res.iterations, res.success)
    return res


def executed_nmp(graph: TannerGraph, checks: Sequence[int]) -> int:
    """NMP of a list of executed check steps: sum of 2 * degree."""
    deg = graph.check_degrees()
    return int(2 * deg[np.asarray(checks, dtype=np.int64)].sum())
