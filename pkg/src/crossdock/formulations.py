"""The CROSS-DOCK and R-CROSS-DOCK models as evaluators and residual checkers.

CROSS-DOCK couples transfers to dock assignments in both directions: docking
trucks i and j at (k, l) *forces* z_ijkl = 1, and a transfer is only allowed
when the destination truck leaves late enough (the product constraint
f_ij * z_ijkl * (d_j - a_i - t_kl) >= 0) and, on a shared dock, when the time
windows do not intersect (z_ijkk <= xhat_ij + xhat_ji).

R-CROSS-DOCK drops the forcing, fixes z_ijkl = 0 whenever d_j - a_i - t_kl <= 0
(note the closed boundary, unlike CROSS-DOCK's open one), tightens the shared
dock rule to z_ijkk <= xhat_ij, and adds the dock-conflict rule
y_ik + y_jk <= 1 + xhat_ij + xhat_ji.

Both share the objective: transfer cost c_kl * t_kl per selected transfer plus
penalty p_ij * f_ij for every unserved pair.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, IntEnum

from .model import (
    EPS,
    Instance,
    ObjectiveBreakdown,
    Solution,
    compute_xhat,
    event_times,
    total_penalty_constant,
)


class Formulation(Enum):
    CROSS_DOCK = "crossdock"
    R_CROSS_DOCK = "r-crossdock"


class ConstraintFamily(IntEnum):
    """Constraint families; the integer order fixes reporting order."""

    DOCK_UNIQUENESS = 1
    LINK_ZY_I = 2
    LINK_ZY_J = 3
    PAIR_FORCING = 4
    SAME_DOCK_TW = 5
    CAPACITY = 6
    TIME_FEASIBILITY = 7
    DOCK_CONFLICT = 8


_FAMILY_LABEL = {
    ConstraintFamily.DOCK_UNIQUENESS: "DockUniqueness",
    ConstraintFamily.LINK_ZY_I: "LinkZY_i",
    ConstraintFamily.LINK_ZY_J: "LinkZY_j",
    ConstraintFamily.PAIR_FORCING: "PairForcing",
    ConstraintFamily.SAME_DOCK_TW: "SameDockTW",
    ConstraintFamily.CAPACITY: "Capacity",
    ConstraintFamily.TIME_FEASIBILITY: "TimeFeasibility",
    ConstraintFamily.DOCK_CONFLICT: "DockConflict",
}


@dataclass(frozen=True, order=True)
class ConstraintId:
    """One instantiated constraint; indices are 1-based quantifier values."""

    family: ConstraintFamily
    indices: tuple[int, ...]

    def __str__(self) -> str:
        return f"{_FAMILY_LABEL[self.family]}({','.join(map(str, self.indices))})"


@dataclass(frozen=True)
class Violation:
    constraint: ConstraintId
    lhs: float
    rhs: float
    message: str


@dataclass(frozen=True)
class ViolationReport:
    violations: tuple[Violation, ...]

    @property
    def feasible(self) -> bool:
        return not self.violations

    def constraint_ids(self) -> tuple[ConstraintId, ...]:
        return tuple(v.constraint for v in self.violations)


class FormulationMisuseError(ValueError):
    """A formulation-specific operation was called with the wrong model."""


class UnlinkedTransferError(ValueError):
    def __init__(self, i, j, k, l):
        self.indices = (i, j, k, l)
        super().__init__(
            f"unlinked_transfer({i},{j},{k},{l}): transfer references docks "
            f"inconsistent with the dock assignment"
        )


def _check_diagonal_use(sol: Solution, include_diagonal: bool) -> None:
    if include_diagonal:
        return
    for (i, j, _, _) in sol.transfers:
        if i == j:
            raise ValueError(
                f"diagonal transfer ({i},{j}) requires include_diagonal=True"
            )


def _check_shapes(inst: Instance, sol: Solution) -> None:
    if len(sol.dock) != inst.n:
        raise ValueError(
            f"solution docks {len(sol.dock)} trucks but the instance has {inst.n}"
        )


def objective_value(
    inst: Instance,
    sol: Solution,
    form: Formulation,
    include_diagonal: bool = False,
) -> ObjectiveBreakdown:
    """Objective breakdown of a solution; identical arithmetic for both models.

    Raises UnlinkedTransferError when a transfer's docks disagree with the
    dock assignment. Strict-literal CROSS-DOCK self-transfers are exempt from
    that check: nothing in the model links z_iikl to y. Feasibility is *not*
    checked here; use check_solution.
    """
    _check_shapes(inst, sol)
    _check_shapes(inst, sol)
    _check_diagonal_use(sol, include_diagonal)
    cost = 0.0
    served: set[tuple[int, int]] = set()
    fulfilled = 0
    for (i, j, k, l) in sol.transfers:
        free_diagonal = i == j and form is Formulation.CROSS_DOCK
        if not free_diagonal and (sol.dock_of(i) != k or sol.dock_of(j) != l):
            raise UnlinkedTransferError(i, j, k, l)
        cost += inst.c(k, l) * inst.t(k, l)
        served.add((i, j))
        if inst.f(i, j) > EPS:
            fulfilled += 1
    penalty = 0.0
    for i in inst.trucks():
        for j in inst.trucks():
            if i == j and not include_diagonal:
                continue
            if (i, j) not in served:
                penalty += inst.p(i, j) * inst.f(i, j)
    return ObjectiveBreakdown(
        transfer_cost_total=cost,
        penalty_total=penalty,
        total=cost + penalty,
        fulfilled_pairs=fulfilled,
    )


def time_margin(inst: Instance, i: int, j: int, k: int, l: int) -> float:
    """d_j - a_i - t_kl: slack for moving pallets from truck i at k to j at l."""
    return inst.d(j) - inst.a(i) - inst.t(k, l)


def residual_pair_forcing(
    inst: Instance,
    sol: Solution,
    i: int,
    j: int,
    k: int,
    l: int,
    form: Formulation = Formulation.CROSS_DOCK,
) -> float:
    """y_ik + y_jl - 1 - z_ijkl; violated iff > 0. CROSS-DOCK only."""
    if form is not Formulation.CROSS_DOCK:
        raise FormulationMisuseError("pair forcing exists only in CROSS-DOCK")
    y_ik = 1 if sol.dock_of(i) == k else 0
    y_jl = 1 if sol.dock_of(j) == l else 0
    z = 1 if (i, j, k, l) in sol.transfers else 0
    return y_ik + y_jl - 1 - z


def residual_time_feasibility(
    inst: Instance, sol: Solution, i: int, j: int, k: int, l: int
) -> float:
    """The time margin d_j - a_i - t_kl (same value for both models).

    Violation semantics differ: CROSS-DOCK violates iff the transfer is
    selected, f_ij > 0 and the margin is < 0 (open boundary); R-CROSS-DOCK
    violates iff the transfer is selected and the margin is <= 0 (closed
    boundary, regardless of f).
    """
    del sol
    return time_margin(inst, i, j, k, l)


def _time_violated(
    inst: Instance, form: Formulation, i: int, j: int, k: int, l: int
) -> bool:
    margin = time_margin(inst, i, j, k, l)
    if form is Formulation.CROSS_DOCK:
        return inst.f(i, j) > EPS and margin < -EPS
    return margin <= EPS


def residual_same_dock(
    inst: Instance, sol: Solution, i: int, j: int, k: int, form: Formulation
) -> float:
    """z_ijkk minus its precedence bound; violated iff > 0.

    The bound is xhat_ij + xhat_ji for CROSS-DOCK and the rectified xhat_ij
    for R-CROSS-DOCK.
    """
    xhat = compute_xhat(inst)
    z = 1 if (i, j, k, k) in sol.transfers else 0
    if form is Formulation.CROSS_DOCK:
        bound = xhat.get(i, j) + xhat.get(j, i)
    else:
        bound = xhat.get(i, j)
    return z - bound


def residual_dock_conflict(
    inst: Instance,
    sol: Solution,
    i: int,
    j: int,
    k: int,
    form: Formulation = Formulation.R_CROSS_DOCK,
) -> float:
    """y_ik + y_jk - 1 - xhat_ij - xhat_ji; violated iff > 0. R-CROSS-DOCK only."""
    if form is not Formulation.R_CROSS_DOCK:
        raise FormulationMisuseError("dock conflict exists only in R-CROSS-DOCK")
    xhat = compute_xhat(inst)
    y_ik = 1 if sol.dock_of(i) == k else 0
    y_jk = 1 if sol.dock_of(j) == k else 0
    return y_ik + y_jk - 1 - xhat.get(i, j) - xhat.get(j, i)


def occupancy_at(
    inst: Instance, sol: Solution, t_r: float, include_diagonal: bool = False
) -> float:
    """Buffer occupancy at event time t_r: arrived inflow minus departed outflow."""
    occ = 0.0
    for (i, j, _, _) in sol.transfers:
        if not include_diagonal and i == j:
            continue
        if inst.a(i) <= t_r + EPS:
            occ += inst.f(i, j)
        if inst.d(j) <= t_r + EPS:
            occ -= inst.f(i, j)
    return occ


def residual_capacity(
    inst: Instance, sol: Solution, r: int, include_diagonal: bool = False
) -> float:
    """occupancy(t_r) - C; violated iff > 0. r is 1-based in 1..2n."""
    timeline = event_times(inst)
    cap = inst.effective_capacity(include_diagonal)
    return occupancy_at(inst, sol, timeline.at(r), include_diagonal) - cap


def check_solution(
    inst: Instance,
    sol: Solution,
    form: Formulation,
    include_diagonal: bool = False,
) -> ViolationReport:
    """Every violated constraint instance, ordered by (family, indices).

    Dock uniqueness is structural in the Solution representation and can never
    be violated. Violations are data, not errors.
    """
    _check_shapes(inst, sol)
    _check_diagonal_use(sol, include_diagonal)
    xhat = compute_xhat(inst)
    violations: list[Violation] = []

    def add(family, indices, lhs, rhs, message):
        violations.append(
            Violation(ConstraintId(family, tuple(indices)), lhs, rhs, message)
        )

    for (i, j, k, l) in sol.transfers:
        if i == j:
            # strict-literal diagonal: CROSS-DOCK leaves z_iikl unconstrained;
            # R-CROSS-DOCK keeps only the linking rows z <= y_ik, z <= y_il.
            if form is Formulation.R_CROSS_DOCK:
                if sol.dock_of(i) != k:
                    add(
                        ConstraintFamily.LINK_ZY_I,
                        (i, j, k, l),
                        1,
                        0,
                        f"z_{i}{j}{k}{l} = 1 but truck {i} is not at dock {k}",
                    )
                if sol.dock_of(j) != l:
                    add(
                        ConstraintFamily.LINK_ZY_J,
                        (i, j, k, l),
                        1,
                        0,
                        f"z_{i}{j}{k}{l} = 1 but truck {j} is not at dock {l}",
                    )
            continue
        if sol.dock_of(i) != k:
            add(
                ConstraintFamily.LINK_ZY_I,
                (i, j, k, l),
                1,
                0,
                f"z_{i}{j}{k}{l} = 1 but truck {i} is not at dock {k}",
            )
        if sol.dock_of(j) != l:
            add(
                ConstraintFamily.LINK_ZY_J,
                (i, j, k, l),
                1,
                0,
                f"z_{i}{j}{k}{l} = 1 but truck {j} is not at dock {l}",
            )

    if form is Formulation.CROSS_DOCK:
        for i in inst.trucks():
            k = sol.dock_of(i)
            if not k:
                continue
            for j in inst.trucks():
                if j == i:
                    continue
                l = sol.dock_of(j)
                if not l:
                    continue
                if (i, j, k, l) not in sol.transfers:
                    add(
                        ConstraintFamily.PAIR_FORCING,
                        (i, j, k, l),
                        2,
                        1,
                        f"trucks {i}@{k} and {j}@{l} are both docked, which "
                        f"forces z_{i}{j}{k}{l} = 1, but the transfer is absent",
                    )

    for (i, j, k, l) in sol.transfers:
        if i == j or k != l:
            continue
        if form is Formulation.CROSS_DOCK:
            bound = xhat.get(i, j) + xhat.get(j, i)
            rule = f"xhat_{i}{j} + xhat_{j}{i} = {bound}"
        else:
            bound = xhat.get(i, j)
            rule = f"xhat_{i}{j} = {bound}"
        if 1 > bound:
            add(
                ConstraintFamily.SAME_DOCK_TW,
                (i, j, k),
                1,
                bound,
                f"same-dock transfer z_{i}{j}{k}{k} = 1 exceeds its "
                f"precedence bound {rule}",
            )

    timeline = event_times(inst)
    cap = inst.effective_capacity(include_diagonal)
    for r in range(1, 2 * inst.n + 1):
        occ = occupancy_at(inst, sol, timeline.at(r), include_diagonal)
        if occ - cap > EPS:
            add(
                ConstraintFamily.CAPACITY,
                (r,),
                occ,
                cap,
                f"buffer occupancy {occ} at event {r} (t={timeline.at(r)}) "
                f"exceeds capacity {cap}",
            )

    for (i, j, k, l) in sol.transfers:
        if i == j:
            continue
        if _time_violated(inst, form, i, j, k, l):
            margin = time_margin(inst, i, j, k, l)
            op = "<" if form is Formulation.CROSS_DOCK else "<="
            add(
                ConstraintFamily.TIME_FEASIBILITY,
                (i, j, k, l),
                margin,
                0.0,
                f"z_{i}{j}{k}{l} = 1 but d_{j} - a_{i} - t_{k}{l} = "
                f"{margin:.6g} {op} 0",
            )

    if form is Formulation.R_CROSS_DOCK:
        for i in inst.trucks():
            for j in inst.trucks():
                if j <= i:
                    continue
                k = sol.dock_of(i)
                if k and sol.dock_of(j) == k:
                    if xhat.get(i, j) + xhat.get(j, i) == 0:
                        add(
                            ConstraintFamily.DOCK_CONFLICT,
                            (i, j, k),
                            2,
                            1,
                            f"trucks {i} and {j} share dock {k} but their "
                            f"time windows overlap",
                        )

    violations.sort(key=lambda v: (v.constraint.family, v.constraint.indices))
    return ViolationReport(violations=tuple(violations))


def objective_constant(inst: Instance, include_diagonal: bool = False) -> float:
    """Alias of the all-penalties objective floor used by exporters/solvers."""
    return total_penalty_constant(inst, include_diagonal)


__all__ = [
    "Formulation",
    "ConstraintFamily",
    "ConstraintId",
    "Violation",
    "ViolationReport",
    "FormulationMisuseError",
    "UnlinkedTransferError",
    "objective_value",
    "check_solution",
    "residual_pair_forcing",
    "residual_time_feasibility",
    "residual_same_dock",
    "residual_dock_conflict",
    "residual_capacity",
    "occupancy_at",
    "time_margin",
    "objective_constant",
]
