"""Core problem model: agents, goods, feasible allocations, utility evaluation.

A division problem is a triplet (agents, goods, utility matrix). Allocations
are share matrices whose columns sum to one: every good is handed out in
full, possibly in fractions. All solvers and audits in this package consume
and produce these types; identifiers are carried for I/O only and all math
indexes by position.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

# Column sums must match 1 to this absolute tolerance for an allocation to
# count as feasible. Solver outputs are cleaned once (clamp + renormalize)
# before being returned, so downstream audits can rely on exact columns.
FEASIBILITY_TOL = 1e-9

# Entries may carry this much negative/overshoot dust before cleaning.
ENTRY_DUST = 1e-12

# Default threshold separating solver dust from a genuine fractional share.
SPLIT_TOL = 1e-6


class DimensionMismatch(ValueError):
    """Inputs disagree on the number of agents or goods."""


class InfeasibleAllocation(ValueError):
    """An allocation violates the unit column-sum requirement."""


@dataclass(frozen=True)
class Good:
    id: str
    label: str = ""
    market_value: Optional[float] = None

    def __post_init__(self):
        if self.market_value is not None:
            if not np.isfinite(self.market_value) or self.market_value < 0:
                raise ValueError(f"good {self.id!r}: market value must be finite and >= 0")


@dataclass(frozen=True)
class Agent:
    id: str
    label: str = ""
    weight: Fraction = Fraction(1)

    def __post_init__(self):
        w = self.weight
        if not isinstance(w, Fraction):
            object.__setattr__(self, "weight", Fraction(w))
        if self.weight <= 0:
            raise ValueError(f"agent {self.id!r}: weight must be positive")


def _readonly(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, dtype=float, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class DivisionProblem:
    """Agents with entitlement weights, goods, and a non-negative utility matrix."""

    agents: tuple[Agent, ...]
    goods: tuple[Good, ...]
    utilities: np.ndarray  # shape (n agents, q goods)

    def __post_init__(self):
        object.__setattr__(self, "agents", tuple(self.agents))
        object.__setattr__(self, "goods", tuple(self.goods))
        u = np.asarray(self.utilities, dtype=float)
        if u.ndim != 2 or u.shape != (len(self.agents), len(self.goods)):
            raise DimensionMismatch(
                f"utility matrix shape {u.shape} does not match "
                f"{len(self.agents)} agents x {len(self.goods)} goods"
            )
        if not np.all(np.isfinite(u)):
            raise ValueError("utilities must be finite")
        if np.any(u < 0):
            raise ValueError("utilities must be non-negative")
        object.__setattr__(self, "utilities", _readonly(u))

    @property
    def n(self) -> int:
        return len(self.agents)

    @property
    def q(self) -> int:
        return len(self.goods)

    @property
    def weights(self) -> np.ndarray:
        return np.array([float(a.weight) for a in self.agents])

    @property
    def row_totals(self) -> np.ndarray:
        """Each agent's utility for receiving the entire asset."""
        return self.utilities.sum(axis=1)

    def agent_index(self, agent_id: str) -> int:
        for i, a in enumerate(self.agents):
            if a.id == agent_id:
                return i
        raise KeyError(f"unknown agent {agent_id!r}")

    def good_index(self, good_id: str) -> int:
        for a, g in enumerate(self.goods):
            if g.id == good_id:
                return a
        raise KeyError(f"unknown good {good_id!r}")

    def market_values(self) -> np.ndarray:
        missing = [g.id for g in self.goods if g.market_value is None]
        if missing:
            raise ValueError(f"goods without market value: {missing}")
        return np.array([float(g.market_value) for g in self.goods])


@dataclass(frozen=True)
class Allocation:
    """Share matrix z with z[i, a] the fraction of good a given to agent i.

    Construction clamps dust (entries within ENTRY_DUST outside [0, 1]) and
    verifies unit column sums; pass ``validate=False`` to carry deliberately
    broken matrices into audit code.
    """

    shares: np.ndarray
    validate: bool = field(default=True, compare=False)

    def __post_init__(self):
        z = np.asarray(self.shares, dtype=float)
        if z.ndim != 2:
            raise DimensionMismatch("allocation must be a 2-d matrix")
        if self.validate:
            if np.any(z < -ENTRY_DUST) or np.any(z > 1 + ENTRY_DUST):
                bad = np.argwhere((z < -ENTRY_DUST) | (z > 1 + ENTRY_DUST))[0]
                raise InfeasibleAllocation(
                    f"share out of range at agent {bad[0]}, good {bad[1]}: {z[tuple(bad)]}"
                )
            z = np.clip(z, 0.0, 1.0)
            col = z.sum(axis=0)
            off = np.abs(col - 1.0)
            if np.any(off > FEASIBILITY_TOL):
                a = int(np.argmax(off))
                raise InfeasibleAllocation(
                    f"shares of good index {a} sum to {col[a]!r}, expected 1"
                )
        object.__setattr__(self, "shares", _readonly(z))

    @property
    def n(self) -> int:
        return self.shares.shape[0]

    @property
    def q(self) -> int:
        return self.shares.shape[1]

    def column_residual(self) -> float:
        return float(np.abs(self.shares.sum(axis=0) - 1.0).max())


@dataclass(frozen=True)
class UtilityProfile:
    """Bundle utilities U_i and their normalized counterparts U_i / (whole-asset utility)."""

    values: np.ndarray
    normalized: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _readonly(self.values))
        object.__setattr__(self, "normalized", _readonly(self.normalized))


def evaluate(problem: DivisionProblem, alloc: Allocation) -> UtilityProfile:
    """Utility profile of an allocation: U_i = sum_a z[i, a] * u[i, a].

    Raises DimensionMismatch on shape disagreement and InfeasibleAllocation
    naming the first offending good when a column does not sum to one.
    """
    z = alloc.shares
    if z.shape != problem.utilities.shape:
        raise DimensionMismatch(
            f"allocation shape {z.shape} does not match problem {problem.utilities.shape}"
        )
    col = z.sum(axis=0)
    off = np.abs(col - 1.0)
    if np.any(off > FEASIBILITY_TOL):
        a = int(np.argmax(off))
        raise InfeasibleAllocation(
            f"shares of good {problem.goods[a].id!r} sum to {col[a]!r}, expected 1"
        )
    values = (z * problem.utilities).sum(axis=1)
    totals = problem.row_totals
    # An all-zero utility row makes normalization meaningless; report 0 rather
    # than NaN so report-style callers stay finite (validate_problem flags it).
    normalized = np.divide(values, totals, out=np.zeros_like(values), where=totals > 0)
    return UtilityProfile(values=values, normalized=normalized)


def split_count(alloc: Allocation, tol: float = SPLIT_TOL) -> int:
    """Number of goods split between two or more agents.

    A good counts as split when at least two of its shares lie strictly
    inside (tol, 1 - tol).
    """
    if not 0 < tol < 0.5:
        raise ValueError("tol must lie in (0, 0.5)")
    z = alloc.shares
    inner = (z > tol) & (z < 1 - tol)
    return int((inner.sum(axis=0) >= 2).sum())


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    agent_id: Optional[str] = None
    good_id: Optional[str] = None


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()
    warnings: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def messages(self) -> list[str]:
        return [v.message for v in self.violations]


def validate_problem(problem: DivisionProblem) -> ValidationReport:
    """Report-style check that both solvers can run on the problem.

    An empty report means: utilities non-negative and every agent values at
    least one good. Construction already rejects negative or misshapen
    matrices, so violations here come from degenerate rows.
    """
    violations = []
    u = problem.utilities
    for i, agent in enumerate(problem.agents):
        if not np.any(u[i] > 0):
            violations.append(
                Violation(
                    code="agent-values-nothing",
                    message=f"agent {agent.id!r} has no valued good",
                    agent_id=agent.id,
                )
            )
    warnings = []
    for a, good in enumerate(problem.goods):
        if not np.any(u[:, a] > 0):
            warnings.append(
                Violation(
                    code="good-valued-by-nobody",
                    message=f"good {good.id!r} carries zero utility for every agent",
                    good_id=good.id,
                )
            )
    return ValidationReport(violations=tuple(violations), warnings=tuple(warnings))


def check_problem_matrix(utilities: Sequence[Sequence[float]]) -> list[str]:
    """Pre-construction scan used by file loaders: returns violation messages
    (negative entries, non-finite values, ragged rows) without raising."""
    msgs = []
    try:
        arr = np.asarray(utilities, dtype=float)
    except (TypeError, ValueError):
        return ["utility matrix is ragged or non-numeric"]
    if arr.ndim != 2:
        return ["utility matrix is not two-dimensional"]
    if not np.all(np.isfinite(arr)):
        msgs.append("utility matrix contains non-finite entries")
    if np.any(arr < 0):
        bad = np.argwhere(arr < 0)[0]
        msgs.append(f"negative utility at row {bad[0]}, column {bad[1]}")
    return msgs
