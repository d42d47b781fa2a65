"""Iterated partial coloring: the balancing algorithm itself.

Each round projects a scaled Gaussian point onto the intersection of the
shifted sign cube with a scaled coordinate body, represented through its
lift over cube preimages.  Coordinates that land on the cube boundary
are clamped to exact signs; a round is accepted once at least half the
active coordinates become signs and the movement stays within the round
scale.  Accepted rounds at least halve the active set, so the driver
finishes within ceil(log2 n) + 1 rounds.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .convex import Polyhedron, lp_solve, project_polyhedron
from .errors import InputError, NumericalError
from .zonotope import VectorFamily, Zonotope, zonotope_norm

TOL_TIGHT = 1e-7
DEFAULT_C0 = 2.0
DEFAULT_RETRIES = 16
MAX_DOUBLINGS = 24

# Std deviation of the Gaussian fed to the projection.  With a unit
# Gaussian, even a free cube clamps only P(|N(0,1)|>=1) ~ 31.7% of the
# coordinates, which can never reach the required half; at sigma = 2 the
# free-cube clamp rate is ~61.7%, so retries succeed quickly.
GAUSSIAN_SCALE = 2.0

# Bound constant for reporting: discrepancy <= C_IMPL * sqrt(n log2(2d/n))
# on the standard suite (see the acceptance tests, which enforce it).
C_IMPL = 16.0


def round_scale(k: int, d: int, c: float) -> float:
    """Movement budget c * sqrt(k * log2(2d/k)) for a round with k active."""
    return c * math.sqrt(k * math.log2(2.0 * d / k))


@dataclass(frozen=True)
class CoordinateBodyLift:
    """Lifted description of the scaled coordinate body.

    Membership of a coefficient vector a is encoded by feasibility of
    (a, u) with sum_i a_i v_i = A^T u and |u_j| <= scale; the box on a is
    left open here and tightened by the partial-coloring step.
    """

    S: tuple[int, ...]
    scale: float
    polyhedron: Polyhedron
    V_S: np.ndarray

    @property
    def k(self) -> int:
        return len(self.S)

    def contains(self, a) -> bool:
        """Feasibility of the lift with a pinned (an LP in u alone)."""
        a = np.asarray(a, dtype=float)
        k, num = self.k, self.polyhedron.num_vars
        lower = self.polyhedron.lower.copy()
        upper = self.polyhedron.upper.copy()
        lower[:k] = a
        upper[:k] = a
        pinned = Polyhedron(num, self.polyhedron.E, self.polyhedron.e, lower, upper)
        return lp_solve(np.zeros(num), pinned).is_optimal


def build_coordinate_body(Z: Zonotope, V: VectorFamily, S, s: float) -> CoordinateBodyLift:
    """Lift of s * K_S over variables (a, u) for the index set S."""
    S = tuple(sorted(int(i) for i in S))
    if not S:
        raise InputError("index set must be nonempty")
    if s <= 0:
        raise InputError("scale must be positive")
    V_S = V.V[list(S)]
    k, d, m = len(S), Z.d, Z.m
    E = np.hstack([V_S.T, -Z.A.T])  # d rows, k+m columns
    lower = np.concatenate([np.full(k, -np.inf), np.full(m, -s)])
    upper = np.concatenate([np.full(k, np.inf), np.full(m, s)])
    P = Polyhedron(k + m, E, np.zeros(d), lower, upper)
    return CoordinateBodyLift(S=S, scale=float(s), polyhedron=P, V_S=V_S)


@dataclass(frozen=True)
class PartialColoringStep:
    y_new: np.ndarray
    increment: float
    scale_used: float
    c_used: float
    attempts: int
    tight_gained: int


def _increment_norm(Z: Zonotope, V_rows: np.ndarray, delta: np.ndarray) -> float:
    """||sum_i delta_i v_i||_Z recomputed from scratch."""
    return zonotope_norm(Z, V_rows.T @ delta).value


def _endpoint_enumeration(Z: Zonotope, V: VectorFamily, y: np.ndarray,
                          c0: float, d: int) -> PartialColoringStep:
    """Exact small-k branch: try every completion fixing at least half."""
    k = y.shape[0]
    need = (k + 1) // 2
    best = None
    for pattern in itertools.product((1.0, -1.0, None), repeat=k):
        fixed = sum(1 for p in pattern if p is not None)
        if fixed < need:
            continue
        y_new = np.array([y[i] if pattern[i] is None else pattern[i] for i in range(k)])
        inc = _increment_norm(Z, V.V, y - y_new)
        if best is None or inc < best[0]:
            best = (inc, y_new, fixed)
    inc, y_new, fixed = best
    c = c0
    doublings = 0
    while inc > round_scale(k, d, c):
        c *= 2.0
        doublings += 1
        if doublings > MAX_DOUBLINGS:
            raise NumericalError("endpoint enumeration cannot cover its increment")
    return PartialColoringStep(y_new=y_new, increment=inc,
                               scale_used=round_scale(k, d, c), c_used=c,
                               attempts=1, tight_gained=fixed)


def partial_coloring(Z: Zonotope, V: VectorFamily, y, c0: float = DEFAULT_C0,
                     retries: int = DEFAULT_RETRIES, rng=None) -> PartialColoringStep:
    """One partial-coloring round over the active coordinates.

    `V` holds the active vectors only and `y` their fractional values,
    all strictly inside (-1, 1).  Returns the new fractional point (at
    least half its entries exact signs), the measured movement norm, and
    the accepted scale.  The scale starts at c0 * sqrt(k log2(2d/k)) and
    doubles after every `retries` failed Gaussian draws; a draw fails
    when fewer than half the coordinates clamp or the movement exceeds
    the scale.
    """
    y = np.asarray(y, dtype=float)
    k = y.shape[0]
    if k != V.n:
        raise InputError("y must match the number of active vectors")
    if k < 1:
        raise InputError("nothing to color")
    if np.any(np.abs(y) >= 1.0):
        raise InputError("active coordinates must be strictly inside (-1, 1)")
    if rng is None:
        rng = np.random.default_rng()
    d = Z.d

    if k <= 2:
        return _endpoint_enumeration(Z, V, y, c0, d)

    need = (k + 1) // 2
    c = c0
    attempts = 0
    doublings = 0
    best_count = 0
    while doublings <= MAX_DOUBLINGS:
        s = round_scale(k, d, c)
        lift = build_coordinate_body(Z, V, range(k), s)
        lower = lift.polyhedron.lower.copy()
        upper = lift.polyhedron.upper.copy()
        lower[:k] = -1.0 - y
        upper[:k] = 1.0 - y
        P = Polyhedron(k + Z.m, lift.polyhedron.E, lift.polyhedron.e, lower, upper)
        for _ in range(retries):
            attempts += 1
            g = GAUSSIAN_SCALE * rng.standard_normal(k)
            try:
                z = project_polyhedron(g, P, z0=np.zeros(k + Z.m))
            except NumericalError:
                continue
            y_new = y + z[:k]
            tight = np.abs(y_new) >= 1.0 - TOL_TIGHT
            count = int(np.count_nonzero(tight))
            if count < need:
                best_count = max(best_count, count)
                continue
            y_new[tight] = np.sign(y_new[tight])
            np.clip(y_new, -1.0, 1.0, out=y_new)
            inc = _increment_norm(Z, V.V, y - y_new)
            if inc > s:
                continue
            return PartialColoringStep(y_new=y_new, increment=inc, scale_used=s,
                                       c_used=c, attempts=attempts,
                                       tight_gained=count)
        c *= 2.0
        doublings += 1
    raise NumericalError(
        f"partial coloring failed after {attempts} draws "
        f"(best tight count {best_count} of {need} needed)"
    )


@dataclass(frozen=True)
class RoundRecord:
    index: int
    n_active: int
    scale_used: float
    c_used: float
    attempts: int
    tight_gained: int
    increment: float


@dataclass
class ColoringState:
    """Mutable driver state: the fractional point, the open coordinates,
    and the per-round history."""

    y: np.ndarray
    active: np.ndarray
    round_index: int = 0
    log: list[RoundRecord] = field(default_factory=list)

    def record(self, rec: RoundRecord):
        self.log.append(rec)
        self.round_index += 1

    def check_invariants(self):
        assert np.all(np.abs(self.y) <= 1.0)
        inactive = np.setdiff1d(np.arange(self.y.shape[0]), self.active)
        assert np.all(np.abs(self.y[inactive]) == 1.0)


@dataclass(frozen=True)
class BalanceReport:
    signs: np.ndarray
    discrepancy: float
    bound: float
    ratio: float
    rounds: int
    seed: int
    c0: float
    c_final: float
    log: tuple[RoundRecord, ...]
    n: int
    d: int
    m: int

    @property
    def increments(self) -> list[float]:
        return [r.increment for r in self.log]


def _exact_finish(Z: Zonotope, V: VectorFamily, y: np.ndarray,
                  active: np.ndarray) -> np.ndarray:
    """Enumerate all sign completions of the active block, minimizing the
    total discrepancy around the already-fixed part."""
    fixed_sum = V.V.T @ y - V.V[active].T @ y[active]
    best_val, best = None, None
    for pattern in itertools.product((-1.0, 1.0), repeat=active.size):
        x_act = np.array(pattern)
        val = zonotope_norm(Z, fixed_sum + V.V[active].T @ x_act).value
        if best_val is None or val < best_val:
            best_val, best = val, x_act
    return best


def balance(Z: Zonotope, V: VectorFamily, c0: float = DEFAULT_C0,
            seed: int = 0, retries: int = DEFAULT_RETRIES,
            exact_finish: bool = False) -> BalanceReport:
    """Balance the family to exact signs by iterated partial coloring.

    Deterministic given (instance, seed, c0): the Gaussian stream is
    drawn from a fresh PCG64 generator seeded with `seed`.  With
    `exact_finish`, active sets of size at most 8 are completed by
    exhaustive enumeration instead of further coloring rounds.
    """
    n, d = V.n, Z.d
    if n > d:
        raise InputError("instance must be preprocessed (requires n <= d)")
    rng = np.random.default_rng(seed)
    state = ColoringState(y=np.zeros(n), active=np.arange(n))
    c_final = c0
    while state.active.size:
        active = state.active
        k = active.size
        if exact_finish and k <= 8:
            x_act = _exact_finish(Z, V, state.y, active)
            inc = _increment_norm(Z, V.V[active], state.y[active] - x_act)
            c = c0
            while inc > round_scale(k, d, c):
                c *= 2.0
            state.y[active] = x_act
            state.active = np.array([], dtype=int)
            state.record(RoundRecord(index=state.round_index, n_active=k,
                                     scale_used=round_scale(k, d, c), c_used=c,
                                     attempts=1, tight_gained=k, increment=inc))
            c_final = max(c_final, c)
            break
        step = partial_coloring(Z, V.restrict(active), state.y[active],
                                c0=c0, retries=retries, rng=rng)
        state.y[active] = step.y_new
        remaining = active[np.abs(state.y[active]) < 1.0]
        if remaining.size > k - (k + 1) // 2:
            raise NumericalError("partial coloring fixed fewer than half the coordinates")
        state.active = remaining
        state.record(RoundRecord(index=state.round_index, n_active=k,
                                 scale_used=step.scale_used, c_used=step.c_used,
                                 attempts=step.attempts,
                                 tight_gained=step.tight_gained,
                                 increment=step.increment))
        state.check_invariants()
        c_final = max(c_final, step.c_used)

    signs = state.y
    discrepancy = zonotope_norm(Z, V.V.T @ signs).value
    bound = math.sqrt(n * math.log2(2.0 * d / n))
    return BalanceReport(
        signs=signs.astype(int), discrepancy=discrepancy, bound=bound,
        ratio=discrepancy / bound, rounds=len(state.log), seed=seed, c0=c0,
        c_final=c_final, log=tuple(state.log), n=n, d=d, m=Z.m,
    )
