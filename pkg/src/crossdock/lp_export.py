"""CPLEX-dialect LP files for both formulations, for external cross-checks.

Sections: Minimize / Subject To / Bounds / Binaries / End. Variables are
y_i_k and z_i_j_k_l with 1-based indices; rows are ordered by constraint
family then indices, coefficients printed with 17 significant digits, and the
emission is byte-deterministic. The objective's constant part (the
all-penalties floor) cannot ride along in every LP dialect, so it is reported
in a header comment and must be added to the solver's optimum.

The nonlinear time-feasibility constraint is preprocessed into variable
fixings in the Bounds section: under CROSS-DOCK z_i_j_k_l = 0 exactly when
f_ij > 0 and d_j - a_i - t_kl < 0; under R-CROSS-DOCK whenever
d_j - a_i - t_kl <= 0.
"""

from __future__ import annotations

from dataclasses import dataclass

from .formulations import Formulation, time_margin
from .model import EPS, Instance, compute_xhat, event_times, total_penalty_constant

_WRAP = 78


@dataclass(frozen=True)
class LpDocument:
    text: str
    objective_constant: float
    variable_count: int
    constraint_count: int


def lp_filename(instance_name: str, form: Formulation) -> str:
    return f"{instance_name or 'instance'}__{form.value}.lp"


def _num(x: float) -> str:
    return f"{x:.17g}"


def _wrap_terms(label: str, terms: list[str], tail: str) -> list[str]:
    """Render 'label: term term ... tail' wrapped to readable lines."""
    lines = []
    current = f" {label}:"
    for term in terms:
        if len(current) + 1 + len(term) > _WRAP:
            lines.append(current)
            current = "   " + term
        else:
            current += " " + term
    if tail:
        if len(current) + 1 + len(tail) > _WRAP:
            lines.append(current)
            current = "   " + tail
        else:
            current += " " + tail
    lines.append(current)
    return lines


def emit_lp(inst: Instance, form: Formulation) -> LpDocument:
    """Emit the default-mode model (self-flows excluded) as an LP document."""
    n, m = inst.n, inst.m
    xhat = compute_xhat(inst)
    cd = form is Formulation.CROSS_DOCK

    def yname(i, k):
        return f"y_{i}_{k}"

    def zname(i, j, k, l):
        return f"z_{i}_{j}_{k}_{l}"

    y_vars = [yname(i, k) for i in inst.trucks() for k in inst.docks()]
    z_index = [
        (i, j, k, l)
        for i in inst.trucks()
        for j in inst.trucks()
        if j != i
        for k in inst.docks()
        for l in inst.docks()
    ]

    constant = total_penalty_constant(inst)
    lines: list[str] = []
    rows = 0

    obj_terms = []
    for (i, j, k, l) in z_index:
        coef = inst.c(k, l) * inst.t(k, l) - inst.p(i, j) * inst.f(i, j)
        obj_terms.append(f"{'+' if coef >= 0 else '-'} {_num(abs(coef))} {zname(i, j, k, l)}")
    if not obj_terms:
        obj_terms = [f"+ 0 {y_vars[0]}"]  # n = 1: no transfer variables exist

    header = [
        f"\\ {lp_filename(inst.name, form)}",
        f"\\ formulation: {form.value}",
        f"\\ objective constant (add to the optimum): {_num(constant)}",
        f"\\ variables: {len(y_vars)} y + {len(z_index)} z",
    ]

    body: list[str] = ["Minimize"]
    body.extend(_wrap_terms("obj", obj_terms, ""))
    body.append("Subject To")

    # dock uniqueness
    for i in inst.trucks():
        terms = [f"+ {yname(i, k)}" for k in inst.docks()]
        body.extend(_wrap_terms(f"du_{i}", terms, "<= 1"))
        rows += 1
    # linking z <= y_ik and z <= y_jl
    for (i, j, k, l) in z_index:
        body.append(f" lzi_{i}_{j}_{k}_{l}: {zname(i, j, k, l)} - {yname(i, k)} <= 0")
        rows += 1
    for (i, j, k, l) in z_index:
        body.append(f" lzj_{i}_{j}_{k}_{l}: {zname(i, j, k, l)} - {yname(j, l)} <= 0")
        rows += 1
    if cd:
        for (i, j, k, l) in z_index:
            body.append(
                f" pf_{i}_{j}_{k}_{l}: {yname(i, k)} + {yname(j, l)} "
                f"- {zname(i, j, k, l)} <= 1"
            )
            rows += 1
    # same-dock precedence
    for i in inst.trucks():
        for j in inst.trucks():
            if j == i:
                continue
            for k in inst.docks():
                bound = (
                    xhat.get(i, j) + xhat.get(j, i) if cd else xhat.get(i, j)
                )
                body.append(f" sd_{i}_{j}_{k}: {zname(i, j, k, k)} <= {bound}")
                rows += 1
    # capacity at every event time (no rows without transfer variables)
    timeline = event_times(inst)
    cap = inst.effective_capacity()
    if z_index:
        for r in range(1, 2 * n + 1):
            t_r = timeline.at(r)
            terms = []
            for (i, j, k, l) in z_index:
                coef = inst.f(i, j) * (
                    (inst.a(i) <= t_r + EPS) - (inst.d(j) <= t_r + EPS)
                )
                if coef > EPS:
                    terms.append(f"+ {_num(coef)} {zname(i, j, k, l)}")
                elif coef < -EPS:
                    terms.append(f"- {_num(-coef)} {zname(i, j, k, l)}")
            if not terms:
                terms = ["+ 0 " + zname(*z_index[0])]
            body.extend(_wrap_terms(f"cap_{r}", terms, f"<= {_num(cap)}"))
            rows += 1
    if not cd:
        for i in inst.trucks():
            for j in range(i + 1, n + 1):
                for k in inst.docks():
                    rhs = 1 + xhat.get(i, j) + xhat.get(j, i)
                    body.append(
                        f" dc_{i}_{j}_{k}: {yname(i, k)} + {yname(j, k)} <= {rhs}"
                    )
                    rows += 1

    body.append("Bounds")
    for (i, j, k, l) in z_index:
        margin = time_margin(inst, i, j, k, l)
        if cd:
            fixed = inst.f(i, j) > EPS and margin < -EPS
        else:
            fixed = margin <= EPS
        if fixed:
            body.append(f" {zname(i, j, k, l)} = 0")

    body.append("Binaries")
    names = y_vars + [zname(*idx) for idx in z_index]
    current = ""
    for name in names:
        if len(current) + 1 + len(name) > _WRAP:
            body.append(current)
            current = " " + name
        else:
            current += " " + name
    if current:
        body.append(current)
    body.append("End")

    header.append(f"\\ constraints: {rows}")
    text = "\n".join(header + body) + "\n"
    return LpDocument(
        text=text,
        objective_constant=constant,
        variable_count=len(y_vars) + len(z_index),
        constraint_count=rows,
    )
