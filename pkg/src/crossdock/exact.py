"""Exact solvers: branch and bound over dock assignments and a brute-force oracle.

Branching follows arrival order (early trucks constrain precedence most),
docks ascending with "unassigned" last. Nodes are pruned by an admissible
bound: the all-penalties constant, plus the exact net contribution of every
fully decided truck pair, plus an optimistic (capacity-ignoring) contribution
for every undecided pair. Leaf transfer sets come from the subproblem module.

The brute-force oracle enumerates every assignment and always evaluates
transfers through exhaustive subset enumeration, never the per-pair shortcut,
so the two solvers cross-validate each other.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass

from . import subproblem
from .formulations import (
    Formulation,
    ObjectiveBreakdown,
    ViolationReport,
    check_solution,
    objective_value,
)
from .model import EPS, Instance, Solution, compute_xhat, total_penalty_constant

BRUTE_FORCE_LIMIT = 10**6

_UNDOCKED = -1  # internal 0-based marker


class InstanceTooLargeError(ValueError):
    pass


@dataclass(frozen=True)
class Budget:
    max_nodes: int | None = None
    time_limit: float | None = None


@dataclass(frozen=True)
class OptimizeResult:
    best: Solution
    objective: ObjectiveBreakdown
    proven_optimal: bool
    nodes_explored: int
    wall_time: float
    bound_at_root: float
    status: str = "optimal"
    trace: tuple[float, ...] = ()
    rng_algorithm: str | None = None


@dataclass(frozen=True)
class ModelComparison:
    cross_dock: OptimizeResult
    r_cross_dock: OptimizeResult
    absolute_gap: float
    relative_gap_percent: float
    rcd_best_under_cd: ViolationReport

    @property
    def rcd_infeasible_under_cd(self) -> bool:
        return not self.rcd_best_under_cd.feasible


class _Tables:
    """Per-instance lookup tables, 0-based throughout."""

    def __init__(self, inst: Instance, form: Formulation, include_diagonal: bool):
        n, m = inst.n, inst.m
        self.inst = inst
        self.form = form
        self.diag = include_diagonal
        self.cd = form is Formulation.CROSS_DOCK
        self.n, self.m = n, m
        a, d = inst.arrival, inst.departure
        t = inst.transfer_time
        f, p = inst.flow, inst.penalty
        xh = compute_xhat(inst).xhat

        self.order = sorted(range(n), key=lambda i: (a[i], i))
        self.base = total_penalty_constant(inst, include_diagonal)

        ct = [
            [inst.transfer_cost[k][l] * t[k][l] for l in range(m)] for k in range(m)
        ]
        self.ct = ct

        # ok[i][j][k][l]: a forced CROSS-DOCK transfer is acceptable
        # contrib[i][j][k][l]: net objective delta of the (i,j) pair when both
        # docked at (k,l), relative to the all-penalties baseline
        ok = [[[[True] * m for _ in range(m)] for _ in range(n)] for _ in range(n)]
        contrib = [
            [[[0.0] * m for _ in range(m)] for _ in range(n)] for _ in range(n)
        ]
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                pf = p[i][j] * f[i][j]
                for k in range(m):
                    for l in range(m):
                        margin = d[j] - a[i] - t[k][l]
                        if self.cd:
                            fine = (k != l or xh[i][j] + xh[j][i] >= 1) and (
                                f[i][j] <= EPS or margin >= -EPS
                            )
                            ok[i][j][k][l] = fine
                            contrib[i][j][k][l] = ct[k][l] - pf
                        else:
                            allowed = margin > EPS and (k != l or xh[i][j] == 1)
                            contrib[i][j][k][l] = (
                                min(0.0, ct[k][l] - pf) if allowed else 0.0
                            )
        self.ok = ok
        self.contrib = contrib

        # window overlap, for R-CROSS-DOCK dock conflicts
        self.overlap = [
            [xh[i][j] + xh[j][i] == 0 if i != j else False for j in range(n)]
            for i in range(n)
        ]

        # optimistic per ordered pair (0 = not both docked)
        opt = [[0.0] * n for _ in range(n)]
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                best = 0.0
                for k in range(m):
                    for l in range(m):
                        if self.cd:
                            if ok[i][j][k][l] and ok[j][i][l][k]:
                                best = min(best, contrib[i][j][k][l])
                        else:
                            best = min(best, contrib[i][j][k][l])
                opt[i][j] = best
        self.opt = opt

        # strict-literal diagonal terms
        self.diag_const = 0.0
        self.diag_delta = [[0.0] * m for _ in range(n)]
        self.diag_opt = [0.0] * n
        if include_diagonal:
            if self.cd:
                min_ct = min(ct[k][l] for k in range(m) for l in range(m))
                self.diag_const = sum(
                    min(0.0, min_ct - p[i][i] * f[i][i]) for i in range(n)
                )
            else:
                for i in range(n):
                    pf = p[i][i] * f[i][i]
                    self.diag_delta[i] = [min(0.0, ct[k][k] - pf) for k in range(m)]
                    self.diag_opt[i] = min(self.diag_delta[i])

    def root_opt_rest(self) -> float:
        total = sum(
            self.opt[i][j] for i in range(self.n) for j in range(self.n) if i != j
        )
        return total + sum(self.diag_opt)

    def bound_base(self) -> float:
        return self.base + self.diag_const

    def pair_feasible(self, i: int, ki: int, j: int, kj: int) -> bool:
        """Can trucks i@ki and j@kj (0-based docks) coexist?"""
        if self.cd:
            return self.ok[i][j][ki][kj] and self.ok[j][i][kj][ki]
        return not (ki == kj and self.overlap[i][j])

    def assignment_feasible(self, y0) -> bool:
        docked = [(i, y0[i]) for i in range(self.n) if y0[i] != _UNDOCKED]
        for idx, (i, ki) in enumerate(docked):
            for (j, kj) in docked[idx + 1 :]:
                if not self.pair_feasible(i, ki, j, kj):
                    return False
        return True

    def to_public(self, y0) -> tuple[int, ...]:
        return tuple(0 if k == _UNDOCKED else k + 1 for k in y0)

    def fast_value(self, y0) -> float:
        """Exact objective of a feasible assignment when capacity cannot bind."""
        docked = [(i, y0[i]) for i in range(self.n) if y0[i] != _UNDOCKED]
        value = self.bound_base()
        for idx, (i, ki) in enumerate(docked):
            for (j, kj) in docked[idx + 1 :]:
                value += self.contrib[i][j][ki][kj] + self.contrib[j][i][kj][ki]
        if self.diag and not self.cd:
            for (i, ki) in docked:
                value += self.diag_delta[i][ki]
        return value

    def build_solution(self, y0, force_enumeration: bool = False):
        """Transfers for an assignment via the subproblem; None if infeasible.

        Returns (solution, exact) pairs; exact=False marks a heuristic
        capacity selection.
        """
        inst = self.inst
        y1 = self.to_public(y0)
        if self.cd:
            induced = subproblem.induced_transfers_crossdock(inst, y1)
            if isinstance(induced, subproblem.InfeasibilityWitness):
                return None
            if not self.diag:
                return induced, True
            cands = subproblem.diagonal_candidates_crossdock(inst)
            selected, exact, _ = subproblem.select_transfers(
                inst,
                cands,
                forced=induced.transfers,
                include_diagonal=True,
                exact_limit=None if force_enumeration else subproblem.EXACT_SELECTION_LIMIT,
                force_enumeration=force_enumeration,
            )
            transfers = induced.transfers + tuple(
                (cp.i, cp.j, cp.k, cp.l) for cp in selected
            )
            return Solution(dock=y1, transfers=transfers), exact
        try:
            sel = subproblem.optimal_transfers_rcrossdock(
                inst,
                y1,
                include_diagonal=self.diag,
                exact_limit=None if force_enumeration else subproblem.EXACT_SELECTION_LIMIT,
                force_enumeration=force_enumeration,
            )
        except subproblem.DockConflictError:
            return None
        return sel.solution, sel.exact

    def evaluate(self, y0, force_enumeration: bool = False):
        """(objective value, exact flag) of an assignment, or None if infeasible.

        The fast path prices a feasible assignment straight from the tables
        whenever capacity cannot bind; force_enumeration always routes through
        the subproblem's exhaustive selection (the oracle path).
        """
        if not self.assignment_feasible(y0):
            return None
        if self.inst.unbounded_capacity and not force_enumeration:
            return self.fast_value(y0), True
        built = self.build_solution(y0, force_enumeration)
        if built is None:
            return None
        sol, exact = built
        total = objective_value(self.inst, sol, self.form, self.diag).total
        return total, exact


def branch_and_bound(
    inst: Instance,
    form: Formulation,
    budget: Budget | None = None,
    include_diagonal: bool = False,
    on_node=None,
) -> OptimizeResult:
    """Depth-first branch and bound over dock assignments.

    Deterministic: identical inputs give identical node counts and incumbents.
    Returns proven_optimal=True iff the search completed within budget and no
    heuristic leaf evaluation was needed. With an exhausted budget the best
    incumbent found so far is still returned (status "budget_exhausted").
    """
    budget = budget or Budget()
    tables = _Tables(inst, form, include_diagonal)
    n, m = tables.n, tables.m
    start = time.perf_counter()

    y0 = [_UNDOCKED] * n
    state = {
        "best_value": float("inf"),
        "best_y": None,
        "nodes": 0,
        "stopped": False,
        "heuristic": False,
        "trace": [],
    }

    # the empty assignment is always feasible: a guaranteed incumbent
    empty = tables.evaluate(y0)
    state["best_value"], _ = empty
    state["best_y"] = tuple(y0)
    state["trace"].append(state["best_value"])

    bound_at_root = tables.bound_base() + tables.root_opt_rest()
    order = tables.order

    def out_of_budget() -> bool:
        if budget.max_nodes is not None and state["nodes"] >= budget.max_nodes:
            return True
        if budget.time_limit is not None and state["nodes"] % 256 == 0:
            return time.perf_counter() - start > budget.time_limit
        return False

    assigned_docked: list[tuple[int, int]] = []

    def recurse(idx: int, committed: float, opt_rest: float):
        state["nodes"] += 1
        if out_of_budget():
            state["stopped"] = True
            return
        if on_node is not None:
            decided = tuple(
                (u + 1, 0 if y0[u] == _UNDOCKED else y0[u] + 1) for u in order[:idx]
            )
            on_node(decided, tables.bound_base() + committed + opt_rest)
        if idx == n:
            result = tables.evaluate(y0)
            if result is not None:
                value, exact = result
                if not exact:
                    state["heuristic"] = True
                if value < state["best_value"] - EPS:
                    state["best_value"] = value
                    state["best_y"] = tuple(y0)
                    state["trace"].append(value)
            return
        u = order[idx]
        undecided = order[idx + 1 :]

        resolved_opt = sum(tables.opt[u][s] + tables.opt[s][u] for s, _ in assigned_docked)

        for k in range(m):
            feasible = all(
                tables.pair_feasible(s, ks, u, k) for s, ks in assigned_docked
            )
            if not feasible:
                continue
            committed2 = committed
            for s, ks in assigned_docked:
                committed2 += tables.contrib[u][s][k][ks] + tables.contrib[s][u][ks][k]
            opt_rest2 = opt_rest - resolved_opt
            if tables.diag:
                if tables.cd:
                    pass  # diagonal constant already in the base
                else:
                    committed2 += tables.diag_delta[u][k]
                    opt_rest2 -= tables.diag_opt[u]
            bound = tables.bound_base() + committed2 + opt_rest2
            if bound < state["best_value"] - EPS:
                y0[u] = k
                assigned_docked.append((u, k))
                recurse(idx + 1, committed2, opt_rest2)
                assigned_docked.pop()
                y0[u] = _UNDOCKED
            if state["stopped"]:
                return

        # leave truck u unassigned: its pairs contribute exactly zero
        opt_rest2 = opt_rest - resolved_opt
        for v in undecided:
            opt_rest2 -= tables.opt[u][v] + tables.opt[v][u]
        if tables.diag and not tables.cd:
            opt_rest2 -= tables.diag_opt[u]
        bound = tables.bound_base() + committed + opt_rest2
        if bound < state["best_value"] - EPS:
            recurse(idx + 1, committed, opt_rest2)

    recurse(0, 0.0, tables.root_opt_rest())

    completed = not state["stopped"]
    best_y0 = list(state["best_y"])
    built = tables.build_solution(best_y0)
    solution, _ = built
    breakdown = objective_value(inst, solution, form, include_diagonal)
    proven = completed and not state["heuristic"]
    if not completed:
        status = "budget_exhausted"
    elif proven:
        status = "optimal"
    else:
        status = "completed_heuristic"
    return OptimizeResult(
        best=solution,
        objective=breakdown,
        proven_optimal=proven,
        nodes_explored=state["nodes"],
        wall_time=time.perf_counter() - start,
        bound_at_root=bound_at_root,
        status=status,
        trace=tuple(state["trace"]),
    )


def brute_force(
    inst: Instance, form: Formulation, include_diagonal: bool = False
) -> OptimizeResult:
    """Enumerate every dock assignment; transfers solved by exhaustive
    subset enumeration (never the per-pair shortcut or the greedy path)."""
    n, m = inst.n, inst.m
    total_assignments = (m + 1) ** n
    if total_assignments > BRUTE_FORCE_LIMIT:
        raise InstanceTooLargeError(
            f"instance_too_large: (m+1)^n = {total_assignments} exceeds "
            f"{BRUTE_FORCE_LIMIT}"
        )
    tables = _Tables(inst, form, include_diagonal)
    start = time.perf_counter()
    options = list(range(m)) + [_UNDOCKED]

    best_value = float("inf")
    best_y = None
    trace = []
    nodes = 0
    for assignment in itertools.product(options, repeat=n):
        nodes += 1
        result = tables.evaluate(list(assignment), force_enumeration=True)
        if result is None:
            continue
        value, _ = result
        if value < best_value - EPS:
            best_value = value
            best_y = assignment
            trace.append(value)

    built = tables.build_solution(list(best_y), force_enumeration=True)
    solution, _ = built
    breakdown = objective_value(inst, solution, form, include_diagonal)
    return OptimizeResult(
        best=solution,
        objective=breakdown,
        proven_optimal=True,
        nodes_explored=nodes,
        wall_time=time.perf_counter() - start,
        bound_at_root=tables.bound_base() + tables.root_opt_rest(),
        status="optimal",
        trace=tuple(trace),
    )


def compare_models(
    inst: Instance,
    budget: Budget | None = None,
    include_diagonal: bool = False,
) -> ModelComparison:
    """Solve both formulations and report the gap between their optima.

    The relative gap is 100 * (obj_CD - obj_RCD) / obj_CD (zero when the
    CROSS-DOCK optimum is zero). The R-CROSS-DOCK winner is re-checked under
    CROSS-DOCK, flagging the eliminated-solutions phenomenon.
    """
    cd = branch_and_bound(inst, Formulation.CROSS_DOCK, budget, include_diagonal)
    rcd = branch_and_bound(inst, Formulation.R_CROSS_DOCK, budget, include_diagonal)
    gap = cd.objective.total - rcd.objective.total
    rel = 100.0 * gap / cd.objective.total if abs(cd.objective.total) > EPS else 0.0
    rcd_under_cd = check_solution(
        inst, rcd.best, Formulation.CROSS_DOCK, include_diagonal
    )
    return ModelComparison(
        cross_dock=cd,
        r_cross_dock=rcd,
        absolute_gap=gap,
        relative_gap_percent=rel,
        rcd_best_under_cd=rcd_under_cd,
    )
