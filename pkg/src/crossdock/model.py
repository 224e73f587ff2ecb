"""Core data model: problem instances, derived quantities and solutions.

Conventions used across the package:

* Trucks and docks are 1-based in every user-facing surface (APIs that take
  truck/dock indices, file formats, reports). The raw tuple fields of
  :class:`Instance` are 0-based sequences; use the accessors ``a(i)``,
  ``d(i)``, ``t(k, l)``, ... when working in 1-based terms.
* Times are plain reals. Comparisons use the absolute tolerance :data:`EPS`,
  far below the two-decimal resolution of typical data.
* Self-flows (i = j) are outside the model by default; operations accept an
  ``include_diagonal`` flag for the strict-literal variant.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

EPS = 1e-9

#: Marker for an absent dock assignment in a Solution's dock array.
UNASSIGNED = 0


class InvalidInstanceError(ValueError):
    """Raised by validate_instance when hard invariants fail."""

    def __init__(self, issues: tuple[ValidationIssue, ...]):
        self.issues = issues
        super().__init__("; ".join(v.message for v in issues))


@dataclass(frozen=True)
class ValidationIssue:
    """A single named validation failure with its (1-based) indices."""

    code: str
    indices: tuple[int, ...]
    message: str


def _matrix(rows) -> tuple[tuple[float, ...], ...]:
    return tuple(tuple(float(x) for x in row) for row in rows)


@dataclass(frozen=True)
class Instance:
    """An immutable truck-dock assignment instance.

    ``capacity`` is either a positive real or ``None`` for the unbounded
    sentinel ("unbounded" in files). For constraint arithmetic the unbounded
    case is represented by the total flow, which can never bind.
    """

    n: int
    m: int
    arrival: tuple[float, ...]
    departure: tuple[float, ...]
    transfer_time: tuple[tuple[float, ...], ...]
    transfer_cost: tuple[tuple[float, ...], ...]
    flow: tuple[tuple[float, ...], ...]
    penalty: tuple[tuple[float, ...], ...]
    capacity: float | None
    name: str = ""
    seed: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "arrival", tuple(float(x) for x in self.arrival))
        object.__setattr__(self, "departure", tuple(float(x) for x in self.departure))
        for attr in ("transfer_time", "transfer_cost", "flow", "penalty"):
            object.__setattr__(self, attr, _matrix(getattr(self, attr)))
        if self.capacity is not None:
            object.__setattr__(self, "capacity", float(self.capacity))

    # 1-based accessors
    def a(self, i: int) -> float:
        return self.arrival[i - 1]

    def d(self, i: int) -> float:
        return self.departure[i - 1]

    def t(self, k: int, l: int) -> float:
        return self.transfer_time[k - 1][l - 1]

    def c(self, k: int, l: int) -> float:
        return self.transfer_cost[k - 1][l - 1]

    def f(self, i: int, j: int) -> float:
        return self.flow[i - 1][j - 1]

    def p(self, i: int, j: int) -> float:
        return self.penalty[i - 1][j - 1]

    @property
    def unbounded_capacity(self) -> bool:
        return self.capacity is None

    def effective_capacity(self, include_diagonal: bool = False) -> float:
        """The numeric capacity used in constraint arithmetic.

        The unbounded sentinel is replaced by the total in-scope flow, which no
        buffer occupancy can exceed.
        """
        if self.capacity is not None:
            return self.capacity
        return sum(
            self.flow[i][j]
            for i in range(self.n)
            for j in range(self.n)
            if include_diagonal or i != j
        )

    def trucks(self) -> range:
        return range(1, self.n + 1)

    def docks(self) -> range:
        return range(1, self.m + 1)

    def with_capacity(self, capacity: float | None) -> Instance:
        return Instance(
            n=self.n,
            m=self.m,
            arrival=self.arrival,
            departure=self.departure,
            transfer_time=self.transfer_time,
            transfer_cost=self.transfer_cost,
            flow=self.flow,
            penalty=self.penalty,
            capacity=capacity,
            name=self.name,
            seed=self.seed,
        )


@dataclass(frozen=True)
class Precedence:
    """xhat[i][j] = 1 iff truck i departs no later than truck j arrives (0-based storage)."""

    xhat: tuple[tuple[int, ...], ...]

    def get(self, i: int, j: int) -> int:
        """1-based lookup."""
        return self.xhat[i - 1][j - 1]

    def ones(self) -> tuple[tuple[int, int], ...]:
        """All (i, j) with xhat = 1, 1-based, sorted."""
        n = len(self.xhat)
        return tuple(
            (i + 1, j + 1) for i in range(n) for j in range(n) if self.xhat[i][j]
        )


@dataclass(frozen=True)
class EventTimeline:
    """The 2n arrival/departure instants, sorted ascending, duplicates retained."""

    events: tuple[float, ...]

    def __len__(self) -> int:
        return len(self.events)

    def at(self, r: int) -> float:
        """1-based event lookup, r in 1..2n."""
        return self.events[r - 1]


@dataclass(frozen=True)
class Solution:
    """A partial dock assignment plus selected transfers.

    ``dock[i-1]`` is the 1-based dock of truck i, or :data:`UNASSIGNED` (0).
    ``transfers`` holds (i, j, k, l) tuples, 1-based, canonically sorted; at
    most one (k, l) per ordered pair (i, j). Entries with i = j only occur in
    strict-literal (diagonal-included) workflows.
    """

    dock: tuple[int, ...]
    transfers: tuple[tuple[int, int, int, int], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "dock", tuple(int(x) for x in self.dock))
        seen: dict[tuple[int, int], tuple[int, int]] = {}
        for (i, j, k, l) in self.transfers:
            if (i, j) in seen and seen[(i, j)] != (k, l):
                raise ValueError(
                    f"solution has two transfers for pair ({i},{j}): "
                    f"{seen[(i, j)]} and {(k, l)}"
                )
            seen[(i, j)] = (k, l)
        canonical = tuple(
            sorted({(int(i), int(j), int(k), int(l)) for (i, j, k, l) in self.transfers})
        )
        object.__setattr__(self, "transfers", canonical)

    @classmethod
    def empty(cls, n: int) -> Solution:
        return cls(dock=(UNASSIGNED,) * n)

    def dock_of(self, i: int) -> int:
        """1-based dock of truck i, or 0 when unassigned."""
        return self.dock[i - 1]

    def is_docked(self, i: int) -> bool:
        return self.dock[i - 1] != UNASSIGNED

    def docked_trucks(self) -> tuple[int, ...]:
        return tuple(i + 1 for i, k in enumerate(self.dock) if k != UNASSIGNED)

    def transfer_for(self, i: int, j: int) -> tuple[int, int, int, int] | None:
        for tr in self.transfers:
            if tr[0] == i and tr[1] == j:
                return tr
        return None


@dataclass(frozen=True)
class ObjectiveBreakdown:
    transfer_cost_total: float
    penalty_total: float
    total: float
    fulfilled_pairs: int


def validation_issues(inst: Instance) -> list[ValidationIssue]:
    """All hard-invariant violations of an instance, deterministically ordered."""
    issues: list[ValidationIssue] = []
    n, m = inst.n, inst.m

    if n < 1 or m < 1:
        issues.append(
            ValidationIssue("shape_mismatch", (), f"n={n} and m={m} must be positive")
        )
        return issues

    def shape(name, rows, nrows, ncols):
        if len(rows) != nrows or any(len(r) != ncols for r in rows):
            issues.append(
                ValidationIssue(
                    "shape_mismatch",
                    (),
                    f"{name} must be {nrows}x{ncols}, got "
                    f"{len(rows)}x{[len(r) for r in rows]}",
                )
            )
            return False
        return True

    ok = True
    if len(inst.arrival) != n:
        issues.append(
            ValidationIssue("shape_mismatch", (), f"arrival must have length {n}")
        )
        ok = False
    if len(inst.departure) != n:
        issues.append(
            ValidationIssue("shape_mismatch", (), f"departure must have length {n}")
        )
        ok = False
    ok &= shape("transfer_time", inst.transfer_time, m, m)
    ok &= shape("transfer_cost", inst.transfer_cost, m, m)
    ok &= shape("flow", inst.flow, n, n)
    ok &= shape("penalty", inst.penalty, n, n)
    if not ok:
        return issues

    for name, rows in (
        ("transfer_time", inst.transfer_time),
        ("transfer_cost", inst.transfer_cost),
        ("flow", inst.flow),
        ("penalty", inst.penalty),
    ):
        for r, row in enumerate(rows):
            for s, x in enumerate(row):
                if x < -EPS:
                    issues.append(
                        ValidationIssue(
                            "negative_entry",
                            (r + 1, s + 1),
                            f"{name}[{r + 1}][{s + 1}] = {x} is negative",
                        )
                    )
    if inst.capacity is not None and inst.capacity <= EPS:
        issues.append(
            ValidationIssue(
                "nonpositive_capacity", (), f"capacity {inst.capacity} must be positive"
            )
        )

    for i in range(1, n + 1):
        if inst.a(i) >= inst.d(i) - EPS:
            issues.append(
                ValidationIssue(
                    "window_inverted",
                    (i,),
                    f"truck {i}: arrival {inst.a(i)} is not strictly before "
                    f"departure {inst.d(i)}",
                )
            )
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            if i == j:
                continue
            if inst.f(i, j) > EPS and inst.d(j) < inst.a(i) - EPS:
                issues.append(
                    ValidationIssue(
                        "flow_vs_time",
                        (i, j),
                        f"flow[{i}][{j}] = {inst.f(i, j)} but truck {j} departs "
                        f"({inst.d(j)}) before truck {i} arrives ({inst.a(i)})",
                    )
                )
    return issues


def instance_flags(inst: Instance) -> list[str]:
    """Informational flags that are not errors."""
    flags = []
    if inst.n > inst.m:
        flags.append(f"over_constrained (n={inst.n} > m={inst.m})")
    return flags


def validate_instance(inst: Instance) -> Instance:
    """Return the instance unchanged iff all hard invariants hold.

    Raises :class:`InvalidInstanceError` carrying the full issue list
    otherwise. Informational conditions (n > m) are exposed separately via
    :func:`instance_flags`.
    """
    issues = validation_issues(inst)
    if issues:
        raise InvalidInstanceError(tuple(issues))
    return inst


@lru_cache(maxsize=256)
def compute_xhat(inst: Instance) -> Precedence:
    """Precedence matrix: xhat[i][j] = 1 iff d_i <= a_j.

    The comparison is non-strict with tolerance EPS; boundary equality
    (a truck arriving exactly when another departs) counts as precedence.
    Cached per instance value (instances are immutable).
    """
    n = inst.n
    xhat = tuple(
        tuple(
            1 if (i != j and inst.departure[i] <= inst.arrival[j] + EPS) else 0
            for j in range(n)
        )
        for i in range(n)
    )
    return Precedence(xhat=xhat)


@lru_cache(maxsize=256)
def event_times(inst: Instance) -> EventTimeline:
    """The sorted multiset of all arrivals and departures (length exactly 2n)."""
    return EventTimeline(events=tuple(sorted(inst.arrival + inst.departure)))


def total_penalty_constant(inst: Instance, include_diagonal: bool = False) -> float:
    """Sum of p_ij * f_ij over pairs in scope: the objective when nothing ships."""
    return sum(
        inst.penalty[i][j] * inst.flow[i][j]
        for i in range(inst.n)
        for j in range(inst.n)
        if include_diagonal or i != j
    )
