"""Transfer selection for a fixed dock assignment.

Under CROSS-DOCK, docking both trucks of a pair forces the transfer, so the
transfer set is a *function* of the assignment (or the assignment is
infeasible, with a witness naming the clash). Under R-CROSS-DOCK transfers
are optional, so the best set maximizes total gain p_ij*f_ij - c_kl*t_kl
subject to time feasibility, the same-dock precedence rule and capacity.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

from .formulations import ConstraintFamily, ConstraintId, time_margin
from .model import EPS, UNASSIGNED, Instance, Solution, compute_xhat, event_times

#: Largest candidate count for which capacity-constrained selection is exact.
EXACT_SELECTION_LIMIT = 20


@dataclass(frozen=True)
class CandidatePair:
    """One dockable transfer with its net gain and time-feasibility flag."""

    i: int
    j: int
    k: int
    l: int
    gain: float
    feasible: bool


@dataclass(frozen=True)
class InfeasibilityWitness:
    """Why no transfer set is compatible with a CROSS-DOCK assignment."""

    blocking: ConstraintId
    forcing: ConstraintId | None
    message: str


@dataclass(frozen=True)
class TransferSelection:
    solution: Solution
    exact: bool
    total_gain: float


class DockConflictError(ValueError):
    def __init__(self, constraint: ConstraintId, message: str):
        self.constraint = constraint
        super().__init__(message)


def _dock_array(dock) -> tuple[int, ...]:
    if isinstance(dock, Solution):
        return dock.dock
    return tuple(int(x) for x in dock)


def induced_transfers_crossdock(
    inst: Instance, dock, include_diagonal: bool = False
) -> Solution | InfeasibilityWitness:
    """The unique CROSS-DOCK transfer set for a dock assignment, or a witness.

    Pairs are scanned in ascending (i, j) order; the first clash between the
    forced z and a blocking constraint is returned. Capacity is checked last,
    over the full forced set. Diagonal transfers are never *induced*: in the
    strict-literal model they stay free and are handled by the caller's
    selection step.
    """
    del include_diagonal
    y = _dock_array(dock)
    xhat = compute_xhat(inst)
    transfers = []
    for i in inst.trucks():
        k = y[i - 1]
        if k == UNASSIGNED:
            continue
        for j in inst.trucks():
            if j == i:
                continue
            l = y[j - 1]
            if l == UNASSIGNED:
                continue
            forcing = ConstraintId(ConstraintFamily.PAIR_FORCING, (i, j, k, l))
            if k == l and xhat.get(i, j) + xhat.get(j, i) == 0:
                return InfeasibilityWitness(
                    blocking=ConstraintId(ConstraintFamily.SAME_DOCK_TW, (i, j, k)),
                    forcing=forcing,
                    message=(
                        f"docking trucks {i} and {j} together at dock {k} forces "
                        f"z_{i}{j}{k}{k} = 1, but their time windows overlap"
                    ),
                )
            margin = time_margin(inst, i, j, k, l)
            if inst.f(i, j) > EPS and margin < -EPS:
                return InfeasibilityWitness(
                    blocking=ConstraintId(
                        ConstraintFamily.TIME_FEASIBILITY, (i, j, k, l)
                    ),
                    forcing=forcing,
                    message=(
                        f"docking trucks {i}@{k} and {j}@{l} forces "
                        f"z_{i}{j}{k}{l} = 1, but d_{j} - a_{i} - t_{k}{l} = "
                        f"{margin:.6g} < 0"
                    ),
                )
            transfers.append((i, j, k, l))

    solution = Solution(dock=y, transfers=tuple(transfers))
    if not inst.unbounded_capacity:
        timeline = event_times(inst)
        for r in range(1, 2 * inst.n + 1):
            occ = sum(
                inst.f(i, j)
                * ((inst.a(i) <= timeline.at(r) + EPS) - (inst.d(j) <= timeline.at(r) + EPS))
                for (i, j, _, _) in transfers
            )
            if occ - inst.capacity > EPS:
                return InfeasibilityWitness(
                    blocking=ConstraintId(ConstraintFamily.CAPACITY, (r,)),
                    forcing=None,
                    message=(
                        f"the transfers forced by this assignment occupy {occ} "
                        f"buffer units at event {r}, above capacity {inst.capacity}"
                    ),
                )
    return solution


def candidate_pairs(
    inst: Instance, dock, include_diagonal: bool = False
) -> list[CandidatePair]:
    """R-CROSS-DOCK candidates: docked ordered pairs with gain and feasibility.

    Feasibility is the revised rule: strictly positive time margin and, on a
    shared dock, xhat_ij = 1. Diagonal candidates (strict-literal mode) sit at
    the truck's own dock and have no time or precedence condition.
    """
    y = _dock_array(dock)
    xhat = compute_xhat(inst)
    out: list[CandidatePair] = []
    for i in inst.trucks():
        k = y[i - 1]
        if k == UNASSIGNED:
            continue
        if include_diagonal:
            gain = inst.p(i, i) * inst.f(i, i) - inst.c(k, k) * inst.t(k, k)
            out.append(CandidatePair(i, i, k, k, gain, True))
        for j in inst.trucks():
            if j == i:
                continue
            l = y[j - 1]
            if l == UNASSIGNED:
                continue
            feasible = time_margin(inst, i, j, k, l) > EPS and (
                k != l or xhat.get(i, j) == 1
            )
            gain = inst.p(i, j) * inst.f(i, j) - inst.c(k, l) * inst.t(k, l)
            out.append(CandidatePair(i, j, k, l, gain, feasible))
    out.sort(key=lambda cp: (cp.i, cp.j))
    return out


def check_dock_conflicts(inst: Instance, dock) -> ConstraintId | None:
    """First violated dock-conflict constraint for an assignment, if any."""
    y = _dock_array(dock)
    xhat = compute_xhat(inst)
    for i in inst.trucks():
        k = y[i - 1]
        if k == UNASSIGNED:
            continue
        for j in range(i + 1, inst.n + 1):
            if y[j - 1] == k and xhat.get(i, j) + xhat.get(j, i) == 0:
                return ConstraintId(ConstraintFamily.DOCK_CONFLICT, (i, j, k))
    return None


@lru_cache(maxsize=65536)
def _occupancy_profile(inst: Instance, i: int, j: int) -> tuple[float, ...]:
    """Buffer units the (i, j) transfer holds at each of the 2n event times."""
    timeline = event_times(inst)
    fij = inst.f(i, j)
    return tuple(
        fij * ((inst.a(i) <= t + EPS) - (inst.d(j) <= t + EPS))
        for t in timeline.events
    )


def select_transfers(
    inst: Instance,
    candidates: Sequence[CandidatePair],
    forced: Sequence[tuple[int, int, int, int]] = (),
    include_diagonal: bool = False,
    exact_limit: int | None = EXACT_SELECTION_LIMIT,
    force_enumeration: bool = False,
) -> tuple[tuple[CandidatePair, ...], bool, float]:
    """Best subset of positive-gain candidates under the capacity rows.

    Returns (selected, exact, total_gain). ``forced`` transfers contribute
    occupancy but are not selectable. When the all-positive selection fits,
    the per-pair gain rule applies directly; otherwise an exact depth-first
    search runs up to ``exact_limit`` candidates (None = no limit, for oracle
    paths), above which a greedy by gain density takes over and the result is
    flagged non-exact. ``force_enumeration`` skips the per-pair shortcut so
    oracle callers never share the fast path. Gains of exactly zero are never
    selected.
    """
    viable = [
        cp for cp in candidates if cp.feasible and cp.gain > EPS
    ]
    viable.sort(key=lambda cp: (cp.i, cp.j, cp.k, cp.l))
    cap = inst.effective_capacity(include_diagonal)
    n_events = 2 * inst.n

    base = [0.0] * n_events
    for (i, j, _, _) in forced:
        prof = _occupancy_profile(inst, i, j)
        for r in range(n_events):
            base[r] += prof[r]

    profiles = [_occupancy_profile(inst, cp.i, cp.j) for cp in viable]

    def fits(occ, prof):
        return all(occ[r] + prof[r] <= cap + EPS for r in range(n_events))

    # per-pair rule: take everything if capacity never binds
    if not force_enumeration:
        occ_all = list(base)
        for prof in profiles:
            for r in range(n_events):
                occ_all[r] += prof[r]
        if all(v <= cap + EPS for v in occ_all):
            total = sum(cp.gain for cp in viable)
            return tuple(viable), True, total

    if force_enumeration or exact_limit is None or len(viable) <= exact_limit:
        sparse = [
            tuple((r, prof[r]) for r in range(n_events) if prof[r])
            for prof in profiles
        ]

        # a greedy pass seeds the incumbent bound just below its own gain:
        # the DFS prunes against a near-optimal value from the start, while
        # every true optimum still strictly beats the seed, so the
        # lexicographically first optimal subset is reached and kept
        occ = list(base)
        greedy_gain = 0.0
        for idx in range(len(viable)):
            entries = sparse[idx]
            if all(occ[r] + v <= cap + EPS for r, v in entries):
                for r, v in entries:
                    occ[r] += v
                greedy_gain += viable[idx].gain

        best_gain = greedy_gain - 2 * EPS
        best_pick: list[int] | None = None
        suffix = [0.0] * (len(viable) + 1)
        for idx in range(len(viable) - 1, -1, -1):
            suffix[idx] = suffix[idx + 1] + viable[idx].gain
        occ = list(base)
        pick: list[int] = []

        def dfs(idx, gain):
            nonlocal best_gain, best_pick
            if gain + suffix[idx] <= best_gain + EPS:
                return
            if idx == len(viable):
                if gain > best_gain + EPS:
                    best_gain = gain
                    best_pick = list(pick)
                return
            entries = sparse[idx]
            ok = True
            for r, v in entries:
                if occ[r] + v > cap + EPS:
                    ok = False
                    break
            if ok:
                for r, v in entries:
                    occ[r] += v
                pick.append(idx)
                dfs(idx + 1, gain + viable[idx].gain)
                pick.pop()
                for r, v in entries:
                    occ[r] -= v
            dfs(idx + 1, gain)

        dfs(0, 0.0)
        assert best_pick is not None, "an optimum at least matches the greedy seed"
        selected = tuple(viable[idx] for idx in best_pick)
        return selected, True, max(best_gain, 0.0)

    # greedy by gain density: gain per pallet-hour of buffer use
    def density(item) -> float:
        cp = item[0]
        footprint = max(inst.f(cp.i, cp.j) * (inst.d(cp.j) - inst.a(cp.i)), EPS)
        return cp.gain / footprint

    ranked = sorted(
        zip(viable, profiles),
        key=lambda item: (-density(item), item[0].i, item[0].j, item[0].k, item[0].l),
    )
    occ = list(base)
    chosen = []
    for cp, prof in ranked:
        if fits(occ, prof):
            for r in range(n_events):
                occ[r] += prof[r]
            chosen.append(cp)
    chosen.sort(key=lambda cp: (cp.i, cp.j))
    return tuple(chosen), False, sum(cp.gain for cp in chosen)


def diagonal_candidates_crossdock(inst: Instance) -> list[CandidatePair]:
    """Strict-literal CROSS-DOCK self-transfers.

    Nothing in the printed model constrains z_iikl (every constraint
    quantifies j != i), so each truck's self-flow can ship through the
    cheapest dock pair regardless of the assignment.
    """
    best_kl = min(
        ((inst.c(k, l) * inst.t(k, l), k, l) for k in inst.docks() for l in inst.docks()),
        default=None,
    )
    if best_kl is None:
        return []
    cost, k, l = best_kl
    return [
        CandidatePair(i, i, k, l, inst.p(i, i) * inst.f(i, i) - cost, True)
        for i in inst.trucks()
    ]


def optimal_transfers_rcrossdock(
    inst: Instance,
    dock,
    include_diagonal: bool = False,
    exact_limit: int | None = EXACT_SELECTION_LIMIT,
    force_enumeration: bool = False,
) -> TransferSelection:
    """Best R-CROSS-DOCK transfer set for an assignment.

    The assignment must satisfy the dock-conflict constraints; otherwise
    DockConflictError is raised.
    """
    y = _dock_array(dock)
    conflict = check_dock_conflicts(inst, y)
    if conflict is not None:
        raise DockConflictError(
            conflict, f"dock_conflict: {conflict} blocks this assignment"
        )
    cands = candidate_pairs(inst, y, include_diagonal)
    selected, exact, total_gain = select_transfers(
        inst,
        cands,
        include_diagonal=include_diagonal,
        exact_limit=exact_limit,
        force_enumeration=force_enumeration,
    )
    transfers = tuple((cp.i, cp.j, cp.k, cp.l) for cp in selected)
    return TransferSelection(
        solution=Solution(dock=y, transfers=transfers),
        exact=exact,
        total_gain=total_gain,
    )
