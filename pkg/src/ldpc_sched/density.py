"""Quantized L-densities and the variable/check node convolutions.

Densities live on a symmetric LLR lattice ``y_k = -l_max + k * step`` for
``k = 0 .. n_bins`` (``n_bins + 1`` points, ``step = 2 * l_max / n_bins``).
Each point stands for the bin ``[y_k - step/2, y_k + step/2)``; the two end
points also absorb all mass beyond ``+-l_max`` (saturation).  Because 0 and
``+-l_max`` are lattice points, Delta_0 / Delta_inf are single atoms and the
variable-node convolution maps lattice sums back onto the lattice exactly.

The check-node convolution is the exact push-forward of the lattice measure
through ``2 atanh(tanh(a/2) tanh(b/2))`` followed by rounding to the nearest
lattice point.  It works on magnitudes: with ``S = p+ + p-`` and
``D = p+ - p-`` per magnitude, the output satisfies ``S = S1 x S2`` and
``D = D1 x D2`` under the magnitude map, so signs never need a 2-D table.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Sequence

import numpy as np
from numba import njit

LN2 = np.log(2.0)


@dataclass(frozen=True)
class GridSpec:
    l_max: float = 30.0
    n_bins: int = 4096

    def __post_init__(self):
        if not self.l_max > 0:
            raise ValueError("l_max must be positive")
        if self.n_bins < 64 or self.n_bins % 2:
            raise ValueError("n_bins must be even and >= 64")

    @property
    def step(self) -> float:
        return 2.0 * self.l_max / self.n_bins

    @property
    def size(self) -> int:
        """Number of lattice points (``n_bins + 1``)."""
        return self.n_bins + 1

    @property
    def zero_index(self) -> int:
        return self.n_bins // 2

    @property
    def points(self) -> np.ndarray:
        return _points(self.l_max, self.n_bins)

    @property
    def entropy_weights(self) -> np.ndarray:
        """``log2(1 + exp(-y_k))`` per lattice point."""
        return _entropy_weights(self.l_max, self.n_bins)

    def index_of(self, y) -> np.ndarray:
        """Nearest lattice index for LLR values, saturated at the ends."""
        k = np.floor(np.asarray(y, dtype=float) / self.step + 0.5).astype(np.int64) + self.zero_index
        return np.clip(k, 0, self.n_bins)


@lru_cache(maxsize=None)
def _points(l_max, n_bins):
    half = n_bins // 2
    pts = np.arange(-half, half + 1) * (2.0 * l_max / n_bins)
    pts.setflags(write=False)
    return pts


@lru_cache(maxsize=None)
def _entropy_weights(l_max, n_bins):
    w = np.logaddexp(0.0, -_points(l_max, n_bins)) / LN2
    w.setflags(write=False)
    return w


@lru_cache(maxsize=None)
def check_tables(grid: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    """Magnitude map of the check-node rule on ``grid``.

    Returns ``(table, sat)``: ``table[a, b]`` is the lattice magnitude of
    ``a (+) b`` for magnitude indices ``a <= b``; ``sat[a]`` is the smallest
    ``b >= a`` from which the output magnitude stays at ``a``.
    """
    h = grid.n_bins // 2 + 1
    x = np.arange(h) * grid.step
    u = np.exp(-x)
    # 2 atanh(tanh(x1/2) tanh(x2/2)) = log1p(u1 u2) - log(u1 + u2), u = exp(-x)
    with np.errstate(divide="ignore"):
        out = np.log1p(np.outer(u, u)) - np.log(u[:, None] + u[None, :])
    table = np.floor(out / grid.step + 0.5).astype(np.int32)
    np.clip(table, 0, h - 1, out=table)
    table = np.minimum(table, np.minimum.outer(np.arange(h), np.arange(h)).astype(np.int32))
    sat = np.empty(h, dtype=np.int64)
    for a in range(h):
        row = table[a, a:]
        not_sat = np.flatnonzero(row != a)
        sat[a] = a + (not_sat[-1] + 1 if not_sat.size else 0)
    table.setflags(write=False)
    sat.setflags(write=False)
    return table, sat


# ---------------------------------------------------------------- kernels

@njit(cache=True)
def _support(p):
    n = p.shape[0]
    lo = 0
    while lo < n - 1 and p[lo] == 0.0:
        lo += 1
    hi = n - 1
    while hi > lo and p[hi] == 0.0:
        hi -= 1
    return lo, hi


@njit(cache=True)
def _vconv_kernel(p, q, out):
    """Saturating lattice convolution of ``p`` and ``q`` into ``out``."""
    n = p.shape[0]
    z = (n - 1) // 2
    out[:] = 0.0
    plo, phi = _support(p)
    qlo, qhi = _support(q)
    for k in range(plo, phi + 1):
        pk = p[k]
        if pk == 0.0:
            continue
        # l < z - k lands below the grid, l > n - 1 + z - k above it
        l0 = max(qlo, z - k)
        l1 = min(qhi, n - 1 + z - k)
        below = 0.0
        for l in range(qlo, min(l0, qhi + 1)):
            below += q[l]
        above = 0.0
        for l in range(max(l1 + 1, qlo), qhi + 1):
            above += q[l]
        out[0] += pk * below
        out[n - 1] += pk * above
        off = k - z
        for l in range(l0, l1 + 1):
            out[l + off] += pk * q[l]
    _normalize(out)


@njit(cache=True)
def _vconv_entropy(p, q, w):
    """Entropy of the (saturated, normalized) convolution of ``p`` and ``q``."""
    n = p.shape[0]
    z = (n - 1) // 2
    plo, phi = _support(p)
    qlo, qhi = _support(q)
    h = 0.0
    total = 0.0
    for k in range(plo, phi + 1):
        pk = p[k]
        if pk == 0.0:
            continue
        l0 = max(qlo, z - k)
        l1 = min(qhi, n - 1 + z - k)
        below = 0.0
        for l in range(qlo, min(l0, qhi + 1)):
            below += q[l]
        above = 0.0
        for l in range(max(l1 + 1, qlo), qhi + 1):
            above += q[l]
        off = k - z
        acc = below * w[0] + above * w[n - 1]
        mass = below + above
        for l in range(l0, l1 + 1):
            acc += q[l] * w[l + off]
            mass += q[l]
        h += pk * acc
        total += pk * mass
    return h / total


@njit(cache=True)
def _normalize(p):
    s = 0.0
    for k in range(p.shape[0]):
        if p[k] < 0.0:
            p[k] = 0.0
        s += p[k]
    if s > 0.0 and s != 1.0:
        for k in range(p.shape[0]):
            p[k] /= s


@njit(cache=True)
def _to_sd(p, S, D):
    z = (p.shape[0] - 1) // 2
    S[0] = p[z]
    D[0] = 0.0
    for m in range(1, z + 1):
        S[m] = p[z + m] + p[z - m]
        D[m] = p[z + m] - p[z - m]


@njit(cache=True)
def _from_sd(S, D, p):
    z = S.shape[0] - 1
    p[z] = S[0]
    for m in range(1, z + 1):
        p[z + m] = 0.5 * (S[m] + D[m])
        p[z - m] = 0.5 * (S[m] - D[m])
    _normalize(p)


@njit(cache=True)
def _cconv_sd(S1, D1, S2, D2, table, sat, So, Do, T1, T2, U1, U2):
    """Magnitude-domain check-node convolution; symmetric in its two inputs.

    T*/U* are scratch arrays receiving suffix sums of S*/D*.
    """
    h = S1.shape[0]
    So[:] = 0.0
    Do[:] = 0.0
    acc_s1 = 0.0
    acc_s2 = 0.0
    acc_d1 = 0.0
    acc_d2 = 0.0
    T1[h] = 0.0
    T2[h] = 0.0
    U1[h] = 0.0
    U2[h] = 0.0
    for m in range(h - 1, -1, -1):
        acc_s1 += S1[m]
        acc_s2 += S2[m]
        acc_d1 += D1[m]
        acc_d2 += D2[m]
        T1[m] = acc_s1
        T2[m] = acc_s2
        U1[m] = acc_d1
        U2[m] = acc_d2
    for a in range(h):
        sa1 = S1[a]
        sa2 = S2[a]
        da1 = D1[a]
        da2 = D2[a]
        if sa1 == 0.0 and sa2 == 0.0:
            continue
        # diagonal
        q = table[a, a]
        So[q] += sa1 * sa2
        Do[q] += da1 * da2
        # off-diagonal b in (a, sat[a]) through the table
        stop = sat[a]
        if stop < a + 1:
            stop = a + 1
        for b in range(a + 1, stop):
            q = table[a, b]
            So[q] += sa1 * S2[b] + S1[b] * sa2
            Do[q] += da1 * D2[b] + D1[b] * da2
        # saturated tail: output magnitude is a
        if stop < h:
            So[a] += sa1 * T2[stop] + T1[stop] * sa2
            Do[a] += da1 * U2[stop] + U1[stop] * da2


def _cconv_arrays(p, q, grid):
    table, sat = check_tables(grid)
    h = grid.n_bins // 2 + 1
    S1, S2, So = (np.empty(h) for _ in range(3))
    D1, D2, Do = (np.empty(h) for _ in range(3))
    _to_sd(p, S1, D1)
    _to_sd(q, S2, D2)
    T = [np.empty(h + 1) for _ in range(4)]
    _cconv_sd(S1, D1, S2, D2, table, sat, So, Do, *T)
    out = np.empty(grid.size)
    _from_sd(So, Do, out)
    return out


# ---------------------------------------------------------------- LDensity

def _unit_sum(mass):
    """Nudge the largest bin until the left-to-right sum is exactly 1.0.

    Kernels renormalize by that same sequential sum, so a density that
    already sums to 1.0 passes through identity operations bit for bit.
    """
    k = int(np.argmax(mass))
    for _ in range(4):
        s = np.cumsum(mass)[-1]
        if s == 1.0:
            return
        mass[k] += 1.0 - s


@dataclass(frozen=True, eq=False)
class LDensity:
    """Probability mass on the lattice of ``grid``; immutable."""

    grid: GridSpec
    mass: np.ndarray

    def __post_init__(self):
        mass = np.array(self.mass, dtype=np.float64)
        if mass.shape != (self.grid.size,):
            raise ValueError(f"mass must have {self.grid.size} entries")
        if np.any(mass < 0):
            raise ValueError("mass must be non-negative")
        total = np.cumsum(mass)[-1]  # sequential, same order as the kernels
        if not total > 0:
            raise ValueError("mass must have positive total")
        if total != 1.0:
            mass /= total
            _unit_sum(mass)
        mass.setflags(write=False)
        object.__setattr__(self, "mass", mass)

    @classmethod
    def from_samples(cls, samples, grid: GridSpec) -> "LDensity":
        """Histogram of LLR samples on the lattice (nearest point, saturating)."""
        counts = np.bincount(grid.index_of(samples), minlength=grid.size).astype(float)
        return cls(grid, counts)

    def mean(self) -> float:
        return float(self.mass @ self.grid.points)

    def entropy(self) -> float:
        return entropy(self)

    def tv(self, other: "LDensity") -> float:
        _check_grid(self, other)
        return 0.5 * float(np.abs(self.mass - other.mass).sum())

    def to_csv(self, path) -> None:
        """Write ``bin_midpoint,mass`` rows."""
        rows = ["bin_midpoint,mass"]
        rows += [f"{y:.10g},{m:.17g}" for y, m in zip(self.grid.points, self.mass)]
        Path(path).write_text("\n".join(rows) + "\n")


def _check_grid(a: LDensity, b: LDensity):
    if a.grid != b.grid:
        raise ValueError(f"grid mismatch: {a.grid} vs {b.grid}")


def delta_zero(grid: GridSpec = GridSpec()) -> LDensity:
    m = np.zeros(grid.size)
    m[grid.zero_index] = 1.0
    return LDensity(grid, m)


def delta_inf(grid: GridSpec = GridSpec()) -> LDensity:
    m = np.zeros(grid.size)
    m[-1] = 1.0
    return LDensity(grid, m)


def entropy(c: LDensity) -> float:
    """Binary entropy functional ``sum_k mass_k log2(1 + e^{-y_k})`` in bits."""
    return float(c.mass @ c.grid.entropy_weights)


def vconv(c1: LDensity, c2: LDensity) -> LDensity:
    """Variable-node convolution: density of ``a + b``."""
    _check_grid(c1, c2)
    out = np.empty(c1.grid.size)
    # kernel loops are symmetric only up to summation order; order the operands
    p, q = _canonical(c1.mass, c2.mass)
    _vconv_kernel(p, q, out)
    return LDensity(c1.grid, out)


def cconv(c1: LDensity, c2: LDensity) -> LDensity:
    """Check-node convolution: density of ``2 atanh(tanh(a/2) tanh(b/2))``."""
    _check_grid(c1, c2)
    return LDensity(c1.grid, _cconv_arrays(c1.mass, c2.mass, c1.grid))


def _canonical(p, q):
    # deterministic operand order makes vconv exactly commutative
    return (p, q) if p.tobytes() <= q.tobytes() else (q, p)


def vconv_fold(densities: Sequence[LDensity], grid: GridSpec | None = None) -> LDensity:
    """Left fold of :func:`vconv`; the empty fold is Delta_0."""
    if not densities:
        return delta_zero(grid or GridSpec())
    acc = densities[0]
    for c in densities[1:]:
        acc = vconv(acc, c)
    return acc


def cconv_fold(densities: Sequence[LDensity], grid: GridSpec | None = None) -> LDensity:
    """Left fold of :func:`cconv`; the empty fold is Delta_inf."""
    if not densities:
        return delta_inf(grid or GridSpec())
    acc = densities[0]
    for c in densities[1:]:
        acc = cconv(acc, c)
    return acc
