"""Tanner graphs of LDPC parity-check matrices and their file formats.

Directed edges are numbered in check-major order: the edges of check 0 come
first (in the order its variables are listed), then those of check 1, and so
on.  ``check_ptr`` / ``edge_var`` therefore give a CSR view of H, and
``var_ptr`` / ``var_edges`` give the matching CSC view as edge ids.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


class GraphFormatError(ValueError):
    """Raised for malformed alist / QC inputs."""


@dataclass(frozen=True, eq=False)
class TannerGraph:
    n_vars: int
    n_checks: int
    check_neighbors: tuple[tuple[int, ...], ...]
    var_neighbors: tuple[tuple[int, ...], ...]
    punctured: frozenset[int] = field(default_factory=frozenset)

    # flat arrays, filled in __post_init__
    check_ptr: np.ndarray = field(init=False, repr=False)
    edge_var: np.ndarray = field(init=False, repr=False)
    edge_check: np.ndarray = field(init=False, repr=False)
    var_ptr: np.ndarray = field(init=False, repr=False)
    var_edges: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if len(self.check_neighbors) != self.n_checks:
            raise GraphFormatError("check adjacency has wrong length")
        if len(self.var_neighbors) != self.n_vars:
            raise GraphFormatError("variable adjacency has wrong length")

        check_ptr = np.zeros(self.n_checks + 1, dtype=np.int64)
        for a, nb in enumerate(self.check_neighbors):
            check_ptr[a + 1] = check_ptr[a] + len(nb)
        n_edges = int(check_ptr[-1])
        edge_var = np.empty(n_edges, dtype=np.int64)
        edge_check = np.empty(n_edges, dtype=np.int64)
        index: dict[tuple[int, int], int] = {}
        for a, nb in enumerate(self.check_neighbors):
            for pos, i in enumerate(nb):
                if not 0 <= i < self.n_vars:
                    raise GraphFormatError(f"index out of range: variable {i} in check {a}")
                e = int(check_ptr[a]) + pos
                if (i, a) in index:
                    raise GraphFormatError(f"duplicate edge (variable {i}, check {a})")
                index[(i, a)] = e
                edge_var[e] = i
                edge_check[e] = a

        var_ptr = np.zeros(self.n_vars + 1, dtype=np.int64)
        for i, nb in enumerate(self.var_neighbors):
            var_ptr[i + 1] = var_ptr[i] + len(nb)
        if int(var_ptr[-1]) != n_edges:
            raise GraphFormatError("row and column views are inconsistent (edge counts differ)")
        var_edges = np.empty(n_edges, dtype=np.int64)
        seen = set()
        for i, nb in enumerate(self.var_neighbors):
            for pos, a in enumerate(nb):
                if not 0 <= a < self.n_checks:
                    raise GraphFormatError(f"index out of range: check {a} in variable {i}")
                if (i, a) in seen:
                    raise GraphFormatError(f"duplicate edge (variable {i}, check {a})")
                seen.add((i, a))
                e = index.get((i, a))
                if e is None:
                    raise GraphFormatError(
                        f"row and column views are inconsistent at (variable {i}, check {a})"
                    )
                var_edges[int(var_ptr[i]) + pos] = e

        for i in self.punctured:
            if not 0 <= i < self.n_vars:
                raise GraphFormatError(f"index out of range: punctured variable {i}")

        for name, arr in [("check_ptr", check_ptr), ("edge_var", edge_var),
                          ("edge_check", edge_check), ("var_ptr", var_ptr),
                          ("var_edges", var_edges)]:
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "_edge_index", index)

    @property
    def n_edges(self) -> int:
        return int(self.check_ptr[-1])

    def edge_id(self, var: int, check: int) -> int:
        """Dense id of the edge between ``var`` and ``check`` (KeyError if absent)."""
        return self._edge_index[(var, check)]

    @property
    def edge_index(self) -> dict[tuple[int, int], int]:
        return dict(self._edge_index)

    def check_degrees(self) -> np.ndarray:
        return np.diff(self.check_ptr)

    def var_degrees(self) -> np.ndarray:
        return np.diff(self.var_ptr)

    def punctured_mask(self) -> np.ndarray:
        mask = np.zeros(self.n_vars, dtype=bool)
        mask[list(self.punctured)] = True
        return mask

    def to_dense(self) -> np.ndarray:
        H = np.zeros((self.n_checks, self.n_vars), dtype=np.uint8)
        H[self.edge_check, self.edge_var] = 1
        return H

    def edge_pairs(self) -> set[tuple[int, int]]:
        return set(self._edge_index)

    def degree_histogram(self) -> tuple[dict[int, int], dict[int, int]]:
        """(variable-degree -> count, check-degree -> count)."""
        vd, vc = np.unique(self.var_degrees(), return_counts=True)
        cd, cc = np.unique(self.check_degrees(), return_counts=True)
        return dict(zip(vd.tolist(), vc.tolist())), dict(zip(cd.tolist(), cc.tolist()))

    def __repr__(self):
        return (f"TannerGraph(n_vars={self.n_vars}, n_checks={self.n_checks}, "
                f"n_edges={self.n_edges}, punctured={len(self.punctured)})")


def from_check_lists(n_vars: int, check_neighbors: Sequence[Sequence[int]],
                     punctured: Iterable[int] = ()) -> TannerGraph:
    """Build a graph from per-check variable lists; variable lists follow check order."""
    checks = tuple(tuple(int(i) for i in nb) for nb in check_neighbors)
    var_nb: list[list[int]] = [[] for _ in range(n_vars)]
    for a, nb in enumerate(checks):
        for i in nb:
            if not 0 <= i < n_vars:
                raise GraphFormatError(f"index out of range: variable {i} in check {a}")
            var_nb[i].append(a)
    return TannerGraph(n_vars, len(checks), checks, tuple(tuple(v) for v in var_nb),
                       frozenset(int(i) for i in punctured))


def from_dense(H) -> TannerGraph:
    H = np.asarray(H)
    if H.ndim != 2:
        raise GraphFormatError("parity-check matrix must be 2-D")
    return from_check_lists(H.shape[1], [np.flatnonzero(row).tolist() for row in H])


def mark_punctured(graph: TannerGraph, variables: Iterable[int]) -> TannerGraph:
    """Return a copy of ``graph`` whose punctured set is replaced by ``variables``."""
    punct = frozenset(int(i) for i in variables)
    for i in punct:
        if not 0 <= i < graph.n_vars:
            raise GraphFormatError(f"index out of range: punctured variable {i}")
    return TannerGraph(graph.n_vars, graph.n_checks, graph.check_neighbors,
                       graph.var_neighbors, punct)


# ---------------------------------------------------------------- alist

def _int_tokens(line: str, lineno: int) -> list[int]:
    try:
        return [int(tok) for tok in line.split()]
    except ValueError:
        raise GraphFormatError(f"line {lineno}: non-integer token") from None


def parse_alist(text: str) -> TannerGraph:
    """Parse MacKay's alist format.

    Layout: ``N M``, ``max_col_deg max_row_deg``, N column degrees, M row
    degrees, then N lines of 1-based check indices and M lines of 1-based
    variable indices.  Zero entries are padding and are skipped.
    """
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) < 4:
        raise GraphFormatError("malformed header: alist needs at least 4 lines")
    header = _int_tokens(lines[0], 1)
    if len(header) != 2 or min(header) < 1:
        raise GraphFormatError("malformed header: first line must be 'N M' with N, M >= 1")
    n, m = header
    maxdeg = _int_tokens(lines[1], 2)
    if len(maxdeg) != 2:
        raise GraphFormatError("malformed header: second line must hold two maximum degrees")
    col_deg = _int_tokens(lines[2], 3)
    row_deg = _int_tokens(lines[3], 4)
    if len(col_deg) != n or len(row_deg) != m:
        raise GraphFormatError("malformed header: degree lists do not match N and M")
    if len(lines) < 4 + n + m:
        raise GraphFormatError(f"malformed body: expected {n + m} index lines, got {len(lines) - 4}")

    def read_lists(start, count, degrees, bound, what):
        out = []
        for k in range(count):
            lineno = start + k + 1
            idx = [t for t in _int_tokens(lines[start + k], lineno) if t != 0]
            for t in idx:
                if not 1 <= t <= bound:
                    raise GraphFormatError(f"line {lineno}: index out of range ({t} not in 1..{bound})")
            if len(idx) != degrees[k]:
                raise GraphFormatError(
                    f"line {lineno}: {what} {k} lists {len(idx)} entries, degree says {degrees[k]}")
            if len(set(idx)) != len(idx):
                raise GraphFormatError(f"line {lineno}: duplicate entry in {what} {k}")
            out.append(tuple(t - 1 for t in idx))
        return out

    var_lists = read_lists(4, n, col_deg, m, "column")
    check_lists = read_lists(4 + n, m, row_deg, n, "row")
    col_pairs = {(i, a) for i, nb in enumerate(var_lists) for a in nb}
    row_pairs = {(i, a) for a, nb in enumerate(check_lists) for i in nb}
    if col_pairs != row_pairs:
        raise GraphFormatError("row and column views are inconsistent")
    return TannerGraph(n, m, tuple(check_lists), tuple(var_lists))


def to_alist(graph: TannerGraph) -> str:
    vd, cd = graph.var_degrees(), graph.check_degrees()
    lines = [f"{graph.n_vars} {graph.n_checks}",
             f"{int(vd.max(initial=0))} {int(cd.max(initial=0))}",
             " ".join(map(str, vd.tolist())),
             " ".join(map(str, cd.tolist()))]
    lines += [" ".join(str(a + 1) for a in nb) for nb in graph.var_neighbors]
    lines += [" ".join(str(i + 1) for i in nb) for nb in graph.check_neighbors]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- QC lifting

def expand_qc(base, Z: int) -> TannerGraph:
    """Lift a base matrix of circulant shifts (-1 = zero block) by factor ``Z``.

    Block (r, c) with shift k connects variable ``c*Z + (j+k) % Z`` to check
    ``r*Z + j``.
    """
    base = np.asarray(base, dtype=np.int64)
    if base.ndim != 2:
        raise GraphFormatError("base matrix must be 2-D")
    if Z < 1:
        raise GraphFormatError("lifting size Z must be >= 1")
    if np.any(base < -1):
        raise GraphFormatError("base entries must be -1 or a shift in [0, Z)")
    if np.any(base >= Z):
        raise GraphFormatError(f"shift {int(base.max())} >= lifting size {Z}")
    rows, cols = base.shape
    checks = []
    for r in range(rows):
        for j in range(Z):
            checks.append([c * Z + (j + int(base[r, c])) % Z
                           for c in range(cols) if base[r, c] >= 0])
    return from_check_lists(cols * Z, checks)


def parse_qc(text: str) -> TannerGraph:
    """Parse ``rows cols Z`` followed by rows*cols shift values."""
    tokens = text.split()
    try:
        values = [int(t) for t in tokens]
    except ValueError:
        raise GraphFormatError("QC file contains a non-integer token") from None
    if len(values) < 3:
        raise GraphFormatError("malformed header: QC file must start with 'rows cols Z'")
    rows, cols, Z = values[:3]
    if rows < 1 or cols < 1:
        raise GraphFormatError("malformed header: rows and cols must be >= 1")
    body = values[3:]
    if len(body) != rows * cols:
        raise GraphFormatError(f"QC body has {len(body)} entries, expected {rows * cols}")
    return expand_qc(np.array(body).reshape(rows, cols), Z)


def load_code(path, punctured: Iterable[int] = ()) -> TannerGraph:
    """Load an ``.alist`` or ``.qc`` file (decided by suffix, alist otherwise)."""
    path = Path(path)
    text = path.read_text()
    graph = parse_qc(text) if path.suffix.lower() == ".qc" else parse_alist(text)
    punctured = list(punctured)
    return mark_punctured(graph, punctured) if punctured else graph


def random_regular(n_vars: int, dv: int, dc: int, seed: int = 0,
                   max_tries: int = 1000) -> TannerGraph:
    """Random (dv, dc)-regular graph by socket matching.

    Multi-edges left by the random matching are repaired by swapping sockets
    between checks.  Only meant for tests and demos; no girth conditioning.
    """
    if (n_vars * dv) % dc:
        raise ValueError("n_vars * dv must be divisible by dc")
    n_checks = n_vars * dv // dc
    rng = np.random.default_rng(seed)
    rows = rng.permutation(np.repeat(np.arange(n_vars), dv)).reshape(n_checks, dc)
    for _ in range(max_tries):
        bad = [a for a in range(n_checks) if len(set(rows[a].tolist())) < dc]
        if not bad:
            return from_check_lists(n_vars, rows.tolist())
        for a in bad:
            row = rows[a].tolist()
            dup = [p for p in range(dc) if row.count(row[p]) > 1]
            if not dup:  # fixed by an earlier swap this pass
                continue
            pos = dup[0]
            b, q = int(rng.integers(n_checks)), int(rng.integers(dc))
            u, v = rows[a, pos], rows[b, q]
            if b != a and u not in rows[b] and v not in rows[a]:
                rows[a, pos], rows[b, q] = v, u
    raise RuntimeError("could not draw a simple regular graph")
