"""Connections and Wilson-loop holonomies of conjugated operator families.

A family U(lambda) conjugating a reference operator with d iso-degenerate
eigenvalues drags each n-dimensional eigenspace around control space.
The reference space is laid out as C^n (x) C^d: eigenspace i is spanned
by the columns a*d + (i-1), a = 0..n-1.  Holonomies are computed by
discrete parallel transport (unitarized frame overlaps), which is exactly
unitary at every step; the connection 1-form is exposed separately
through central finite differences.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.linalg import schur

from .errors import (
    BranchCutError,
    ContractViolationError,
    DimensionMismatchError,
    PathSingularityError,
    ToleranceError,
)
from .numerics import DEFAULT_TOL, Tolerance, hermitian_eig, polar_isometry

_MIN_OVERLAP_SV = 1e-6
_BRANCH_MARGIN = 1e-3
_MAX_SPLIT_DEPTH = 8


@dataclass
class IsoDegenerateOperator:
    """Reference operator 1_n (x) diag(x) with d distinct n-fold eigenvalues."""

    n: int
    d: int
    x: tuple

    def __post_init__(self):
        self.x = tuple(float(v) for v in self.x)
        if self.n < 1 or self.d < 1 or len(self.x) != self.d:
            raise ContractViolationError("need d eigenvalues for d eigenspaces")
        if len(set(self.x)) != self.d:
            raise ContractViolationError("eigenvalues must be pairwise distinct")

    @property
    def dim(self) -> int:
        return self.n * self.d

    @property
    def matrix(self) -> np.ndarray:
        return np.kron(np.eye(self.n, dtype=complex), np.diag(self.x).astype(complex))

    def selector(self, i: int) -> np.ndarray:
        """Isometry onto eigenspace i (1-based), in the reference layout."""
        return _selector(self.dim, self.n, i)


def _selector(dim: int, n: int, i: int) -> np.ndarray:
    if dim % n:
        raise DimensionMismatchError(f"dimension {dim} is not a multiple of degeneracy {n}")
    d = dim // n
    if not 1 <= i <= d:
        raise IndexError(f"eigenspace index {i} out of range 1..{d}")
    S = np.zeros((dim, n), dtype=complex)
    for a in range(n):
        S[a * d + (i - 1), a] = 1.0
    return S


@dataclass
class UnitaryFamily:
    """Map from control parameters to unitaries, checked on every call."""

    D: int
    dim: int
    evaluate: Callable = field(repr=False)

    def __call__(self, lam) -> np.ndarray:
        lam = np.atleast_1d(np.asarray(lam, dtype=float))
        if lam.shape != (self.D,):
            raise DimensionMismatchError(f"parameter shape {lam.shape} != ({self.D},)")
        U = np.asarray(self.evaluate(lam), dtype=complex)
        if U.shape != (self.dim, self.dim):
            raise DimensionMismatchError("family evaluation has the wrong dimension")
        if np.max(np.abs(U.conj().T @ U - np.eye(self.dim))) > DEFAULT_TOL.resid_abs:
            raise ContractViolationError("family evaluation is not unitary")
        return U


def exponential_family(generators) -> UnitaryFamily:
    """U(lambda) = prod_mu exp(-i lambda_mu G_mu) for Hermitian generators."""
    gens = [np.asarray(G, dtype=complex) for G in generators]
    if not gens:
        raise ContractViolationError("need at least one generator")
    dim = gens[0].shape[0]
    eigs = [hermitian_eig(G) for G in gens]

    def evaluate(lam):
        U = np.eye(dim, dtype=complex)
        for mu, (w, V) in enumerate(eigs):
            U = U @ (V * np.exp(-1j * lam[mu] * w)) @ V.conj().T
        return U

    return UnitaryFamily(D=len(gens), dim=dim, evaluate=evaluate)


def tabulated_family(grid, table, method: str = "linear") -> UnitaryFamily:
    """Family interpolated from unitaries tabulated on a rectangular grid.

    grid: one strictly increasing 1-D node array per control direction;
    table: array of shape (len(g_1), ..., len(g_D), dim, dim).  Nearest
    lookup snaps to the closest node; linear interpolation blends matrix
    entries multilinearly and restores unitarity with a polar projection.
    """
    axes = [np.asarray(g, dtype=float) for g in grid]
    table = np.asarray(table, dtype=complex)
    D = len(axes)
    if table.ndim != D + 2 or table.shape[-1] != table.shape[-2]:
        raise DimensionMismatchError("table shape does not match the grid")
    if tuple(len(g) for g in axes) != table.shape[:D]:
        raise DimensionMismatchError("table shape does not match the grid")
    if method not in ("linear", "nearest"):
        raise ContractViolationError(f"unknown interpolation method {method!r}")
    dim = table.shape[-1]

    def evaluate(lam):
        for mu, g in enumerate(axes):
            if lam[mu] < g[0] - 1e-12 or lam[mu] > g[-1] + 1e-12:
                raise ContractViolationError(
                    f"parameter {lam[mu]} outside tabulated range in direction {mu}")
        if method == "nearest":
            idx = tuple(int(np.argmin(np.abs(g - lam[mu]))) for mu, g in enumerate(axes))
            return table[idx]
        acc = np.zeros((dim, dim), dtype=complex)
        lows, fracs = [], []
        for mu, g in enumerate(axes):
            j = int(np.clip(np.searchsorted(g, lam[mu]) - 1, 0, len(g) - 2))
            lows.append(j)
            fracs.append((lam[mu] - g[j]) / (g[j + 1] - g[j]))
        for corner in range(1 << D):
            w = 1.0
            idx = []
            for mu in range(D):
                hi = (corner >> mu) & 1
                w *= fracs[mu] if hi else 1.0 - fracs[mu]
                idx.append(lows[mu] + hi)
            if w:
                acc += w * table[tuple(idx)]
        return polar_isometry(acc)

    return UnitaryFamily(D=D, dim=dim, evaluate=evaluate)


_FIXTURE_SEED = 7
_FIXTURE_SCALE = 1.8


def builtin_family(name: str):
    """Named built-in families; returns (UnitaryFamily, IsoDegenerateOperator).

    "fixture-n2d2": a fixed 2-parameter exponential family on dimension 4
    with a doubly degenerate reference operator (n = 2, d = 2), generated
    once from a frozen seed and scaled so rectangle holonomies are
    generic: non-abelian and universality-witnessing.
    """
    if name != "fixture-n2d2":
        raise ContractViolationError(f"unknown builtin family {name!r}")
    rng = np.random.default_rng(np.random.SeedSequence(_FIXTURE_SEED))
    gens = []
    for _ in range(2):
        G = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        G = (G + G.conj().T) / 2
        G *= _FIXTURE_SCALE / np.linalg.norm(G, 2)
        gens.append(G)
    fam = exponential_family(gens)
    return fam, IsoDegenerateOperator(n=2, d=2, x=(-1.0, 1.0))


@dataclass
class LoopPath:
    """A closed polyline in control space with per-segment subdivision."""

    waypoints: np.ndarray  # (W, D)
    refinement: int = 16

    def __post_init__(self):
        self.waypoints = np.atleast_2d(np.asarray(self.waypoints, dtype=float))
        if self.waypoints.shape[0] < 3:
            raise ContractViolationError("a loop needs at least 3 waypoints")
        if not np.array_equal(self.waypoints[0], self.waypoints[-1]):
            raise ContractViolationError("loop must close: first waypoint != last")
        if self.refinement < 1:
            raise ContractViolationError("refinement must be >= 1")

    @property
    def base(self) -> np.ndarray:
        return self.waypoints[0]

    def points(self) -> np.ndarray:
        """The discretized traversal, endpoint included once at each end."""
        pts = [self.waypoints[0]]
        for a, b in zip(self.waypoints[:-1], self.waypoints[1:]):
            for t in range(1, self.refinement + 1):
                pts.append(a + (b - a) * (t / self.refinement))
        return np.array(pts)

    def reversed(self) -> "LoopPath":
        return LoopPath(self.waypoints[::-1].copy(), self.refinement)

    def refined(self, factor: int) -> "LoopPath":
        return LoopPath(self.waypoints.copy(), self.refinement * int(factor))

    def scaled(self, s: float, about=None) -> "LoopPath":
        about = self.base if about is None else np.asarray(about, dtype=float)
        return LoopPath(about + s * (self.waypoints - about), self.refinement)

    def split(self) -> tuple["LoopPath", "LoopPath"]:
        """Two sub-loops through the base, chorded at a midpoint of the loop."""
        wps = self.waypoints
        W = wps.shape[0]
        if W >= 5:
            mid = (W - 1) // 2
            first = np.vstack([wps[: mid + 1], wps[[0]]])
            second = np.vstack([wps[[0]], wps[mid:]])
        else:
            # triangles reproduce themselves under waypoint chords; cut the far edge
            m = (wps[1] + wps[2]) / 2
            first = np.vstack([wps[[0, 1]], m[None, :], wps[[0]]])
            second = np.vstack([wps[[0]], m[None, :], wps[2:]])
        return LoopPath(first, self.refinement), LoopPath(second, self.refinement)

    @classmethod
    def rectangle(cls, corner_a, corner_b, refinement: int = 16) -> "LoopPath":
        """Axis-aligned rectangle in a 2-D control space, based at corner_a."""
        a = np.asarray(corner_a, dtype=float)
        b = np.asarray(corner_b, dtype=float)
        if a.shape != (2,) or b.shape != (2,):
            raise DimensionMismatchError("rectangle corners must be 2-D points")
        wps = np.array([a, [b[0], a[1]], b, [a[0], b[1]], a])
        return cls(wps, refinement)


def connection_at(fam: UnitaryFamily, lam, i: int, n: int, step: float = 1e-5):
    """Central-difference connection components on eigenspace i.

    Returns (components, defects): D anti-Hermitian n x n matrices (the
    anti-Hermitian projection of the compressed U-dagger dU) and the
    projection defects, each O(step^2) for a smooth family.
    """
    if step <= 0:
        raise ContractViolationError("step must be positive")
    lam = np.asarray(lam, dtype=float)
    S = _selector(fam.dim, n, i)
    U0 = fam(lam)
    comps, defects = [], []
    for mu in range(fam.D):
        e = np.zeros(fam.D)
        e[mu] = step
        dU = (fam(lam + e) - fam(lam - e)) / (2 * step)
        A = S.conj().T @ (U0.conj().T @ dU) @ S
        anti = (A - A.conj().T) / 2
        comps.append(anti)
        defects.append(float(np.max(np.abs(A - anti))))
    return comps, defects


def loop_holonomy(fam: UnitaryFamily, loop: LoopPath, i: int, n: int,
                  tol: Tolerance = DEFAULT_TOL) -> np.ndarray:
    """Discrete Wilson loop of eigenspace i along the path.

    Frames F(lambda) = U(lambda) S_i are linked by the unitarized overlaps
    polar_isometry(F(t+1)-dagger F(t)), multiplied in path order; the
    result is the parallel-transport unitary expressed in the base frame.
    """
    S = _selector(fam.dim, n, i)
    pts = loop.points()
    F_prev = fam(pts[0]) @ S
    H = np.eye(n, dtype=complex)
    for t in range(1, pts.shape[0]):
        F_t = fam(pts[t]) @ S
        O = F_t.conj().T @ F_prev
        sv = np.linalg.svd(O, compute_uv=False)
        if sv[-1] < _MIN_OVERLAP_SV:
            raise PathSingularityError(
                f"frame overlap lost rank at step {t} (sigma_min = {sv[-1]:.3e})")
        H = polar_isometry(O, tol) @ H
        F_prev = F_t
    defect = float(np.max(np.abs(H.conj().T @ H - np.eye(n))))
    if defect > tol.resid_abs:
        raise ToleranceError(f"holonomy unitarity defect {defect:.3e}")
    return H


def holonomy_nonabelian_witness(fam: UnitaryFamily, loop1: LoopPath, loop2: LoopPath,
                                i: int, n: int, tol: Tolerance = DEFAULT_TOL) -> float:
    """Frobenius norm of the commutator of two loop holonomies."""
    if not np.array_equal(loop1.base, loop2.base):
        raise ContractViolationError("witness loops must share their base point")
    H1 = loop_holonomy(fam, loop1, i, n, tol)
    H2 = loop_holonomy(fam, loop2, i, n, tol)
    return float(np.linalg.norm(H1 @ H2 - H2 @ H1))


def principal_log_unitary(H) -> np.ndarray:
    """Anti-Hermitian principal logarithm of a unitary matrix.

    Eigenphases within the branch margin of -1 are rejected; callers
    shrink or split the loop and retry.
    """
    T, Z = schur(np.asarray(H, dtype=complex), output="complex")
    phases = np.angle(np.diag(T))
    if np.any(np.abs(phases) > np.pi - _BRANCH_MARGIN):
        raise BranchCutError("holonomy eigenvalue within margin of the branch cut")
    return (Z * (1j * phases)) @ Z.conj().T


def _collect_log(fam, loop, i, n, tol, depth=0):
    H = loop_holonomy(fam, loop, i, n, tol)
    try:
        return [principal_log_unitary(H)]
    except BranchCutError:
        if depth >= _MAX_SPLIT_DEPTH:
            raise
        first, second = loop.split()
        return (_collect_log(fam, first, i, n, tol, depth + 1)
                + _collect_log(fam, second, i, n, tol, depth + 1))


def holonomy_algebra_span(fam: UnitaryFamily, loops, i: int, n: int,
                          tol: Tolerance = DEFAULT_TOL) -> int:
    """Real dimension of the Lie algebra generated by the loop holonomies.

    Principal logs of the holonomies (with branch-cut splitting retries)
    are closed under commutators over the reals until stable; dimension
    n^2 certifies that the loops generate the whole unitary group of the
    eigenspace.
    """
    loops = list(loops)
    if not loops:
        raise ContractViolationError("need at least one loop")
    logs = []
    for loop in loops:
        logs.extend(_collect_log(fam, loop, i, n, tol))

    rows: list[np.ndarray] = []
    mats: list[np.ndarray] = []

    def vec(K):
        return np.concatenate([K.real.reshape(-1), K.imag.reshape(-1)])

    def add(K) -> bool:
        v = vec(K)
        n0 = np.linalg.norm(v)
        for _ in range(2):
            for q in rows:
                v = v - (q @ v) * q
        r = np.linalg.norm(v)
        if r <= max(tol.resid_abs, tol.rank_rel * n0):
            return False
        v = v / r
        rows.append(v)
        mats.append(v[: n * n].reshape(n, n) + 1j * v[n * n:].reshape(n, n))
        return True

    for K in logs:
        add(K)
        if len(rows) == n * n:
            return n * n
    frontier = list(range(len(mats)))
    while frontier and len(rows) < n * n:
        new = []
        for a in range(len(mats)):
            for b in frontier:
                if a == b:
                    continue
                if add(mats[a] @ mats[b] - mats[b] @ mats[a]):
                    new.append(len(mats) - 1)
                    if len(rows) == n * n:
                        return n * n
        frontier = new
    return len(rows)


@dataclass
class RefinementLadder:
    """Successive holonomies under refinement doubling and their defects."""

    refinements: list
    defects: list  # Frobenius distance between consecutive refinements
    holonomy: np.ndarray  # at the finest refinement


def refinement_ladder(fam: UnitaryFamily, loop: LoopPath, i: int, n: int,
                      doublings: int = 4, tol: Tolerance = DEFAULT_TOL) -> RefinementLadder:
    refs = [loop.refinement * 2 ** j for j in range(doublings + 1)]
    hols = [loop_holonomy(fam, loop.refined(2 ** j), i, n, tol)
            for j in range(doublings + 1)]
    defects = [float(np.linalg.norm(hols[j] - hols[j + 1])) for j in range(doublings)]
    return RefinementLadder(refinements=refs, defects=defects, holonomy=hols[-1])
