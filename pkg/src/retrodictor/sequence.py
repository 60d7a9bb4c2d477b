"""
Exact joint distributions of sequences of projective measurements.

A :class:`JointDistribution` only exists relative to a complete
:class:`MeasurementPlan`, so every probability query implicitly names the
observations made at all earlier and later slots. Asking for the
probability of a late outcome "with nothing measured before" means building
a different plan; there is no way to leave a slot's context implicit.
"""

from __future__ import annotations

import itertools
import operator
from dataclasses import dataclass
from types import MappingProxyType
from typing import Mapping

import numpy as np

from .qla import DensityOperator, DimensionError, ProjectiveDecomposition
from .tolerances import EPS_JOINT, EPS_NEGATIVE, EPS_ZERO

__all__ = [
    "ZeroProbabilityBranch",
    "UndefinedConditional",
    "EventAtom",
    "MeasurementPlan",
    "JointDistribution",
    "luders_update",
    "joint_distribution",
    "event_probability",
    "conditional",
]


class ZeroProbabilityBranch(ArithmeticError):
    """A measurement outcome whose probability is at or below ``EPS_ZERO``."""

    def __init__(self, prob):
        self.prob = prob
        super().__init__(f"zero-probability branch (prob = {prob:.3e})")


class UndefinedConditional(ArithmeticError):
    """Conditioning on an event of probability at or below ``EPS_ZERO``."""

    def __init__(self, prob, what="conditioning event"):
        self.prob = prob
        super().__init__(f"undefined conditional: {what} has probability {prob:.3e}")


@dataclass(frozen=True, order=True)
class EventAtom:
    """Outcome ``label`` at time slot ``ordinal`` (1-based)."""

    ordinal: int
    label: str

    def __post_init__(self):
        if not isinstance(self.ordinal, int) or self.ordinal < 1:
            raise ValueError(f"ordinal must be a positive integer, got {self.ordinal!r}")

    def __str__(self):
        return f"{self.label}^[{self.ordinal}]"


class MeasurementPlan:
    """Ordered observations; slot ``t`` (1-based) is the t-th measurement."""

    __slots__ = ("slots", "dim")

    def __init__(self, slots):
        slots = tuple(slots)
        if not slots:
            raise ValueError("a measurement plan needs at least one slot")
        dim = slots[0].dim
        for t, s in enumerate(slots, start=1):
            if not isinstance(s, ProjectiveDecomposition):
                raise TypeError(f"slot {t} is not a ProjectiveDecomposition")
            if s.dim != dim:
                raise DimensionError(dim, s.dim, f"slots 1 and {t}")
        self.slots = slots
        self.dim = dim

    def __len__(self):
        return len(self.slots)

    def slot(self, ordinal):
        if not 1 <= ordinal <= len(self.slots):
            raise IndexError(f"ordinal {ordinal} outside plan of length {len(self.slots)}")
        return self.slots[ordinal - 1]

    def outcomes(self):
        """All outcome sequences, slot by slot in block order."""
        return itertools.product(*(s.labels for s in self.slots))

    def __repr__(self):
        return f"MeasurementPlan(dim={self.dim}, slots={[list(s.labels) for s in self.slots]})"


def luders_update(rho, p):
    """Probability of outcome ``p`` and the collapsed state.

    Returns
    -------
    prob : float
        Tr(P rho P), clamped to [0, 1].
    post : DensityOperator
        P rho P / prob.

    Raises
    ------
    ZeroProbabilityBranch
        If ``prob <= EPS_ZERO``; no post-state is produced.
    """
    if rho.dim != p.dim:
        raise DimensionError(rho.dim, p.dim, "state and projector")
    P = p.matrix
    m = P @ rho.matrix @ P
    prob = min(max(float(m.trace().real), 0.0), 1.0)
    if prob <= EPS_ZERO:
        raise ZeroProbabilityBranch(prob)
    m /= prob
    return prob, DensityOperator._unchecked(m)


def _outcome_probability(rho, p):
    # Tr(P rho) for Hermitian P is sum_ij P_ij^* rho_ij, clamped like luders_update
    prob = float(np.vdot(p.matrix, rho.matrix).real)
    return min(max(prob, 0.0), 1.0)


class JointDistribution:
    """Probabilities of every outcome sequence of a plan.

    ``table`` maps outcome tuples (one label per slot) to probabilities.
    Entries are stored as computed; reading through :meth:`prob` clamps tiny
    negative round-off to zero.
    """

    __slots__ = ("plan", "_table")

    def __init__(self, plan, table: Mapping[tuple, float]):
        table = dict(table)
        expected = list(plan.outcomes())
        if len(table) != len(expected) or any(o not in table for o in expected):
            raise ValueError("joint table must cover the full outcome space of the plan")
        for o, v in table.items():
            if v < -EPS_NEGATIVE:
                raise ValueError(f"negative probability {v:.3e} for outcome {o}")
        total = sum(table.values())
        if abs(total - 1.0) > EPS_JOINT:
            raise ValueError(f"joint table sums to {total:.12g}, not 1")
        self.plan = plan
        self._table = {o: table[o] for o in expected}

    @property
    def table(self):
        return MappingProxyType(self._table)

    def prob(self, outcome):
        return max(self._table[tuple(outcome)], 0.0)

    def items(self):
        return ((o, max(v, 0.0)) for o, v in self._table.items())

    def __repr__(self):
        return f"JointDistribution({self.plan!r}, {len(self._table)} outcomes)"


def joint_distribution(rho, plan):
    """Chain Lüders updates along every branch of ``plan``.

    A branch that reaches zero probability gives exactly 0 to all of its
    descendants.
    """
    if rho.dim != plan.dim:
        raise DimensionError(rho.dim, plan.dim, "state and plan")
    table = {}
    last = len(plan.slots) - 1

    def descend(state, weight, t, prefix):
        for block in plan.slots[t]:
            key = prefix + (block.label,)
            if t == last:
                # leaves need Tr(P rho P) = Tr(P rho) only, not the post-state
                p = 0.0 if state is None else _outcome_probability(state, block.projector)
                table[key] = weight * p if p > EPS_ZERO else 0.0
                continue
            if state is None:
                descend(None, 0.0, t + 1, key)
                continue
            try:
                p, post = luders_update(state, block.projector)
            except ZeroProbabilityBranch:
                descend(None, 0.0, t + 1, key)
            else:
                descend(post, weight * p, t + 1, key)

    descend(rho, 1.0, 0, ())
    return JointDistribution(plan, table)


def _as_atoms(atoms):
    return [a if isinstance(a, EventAtom) else EventAtom(*a) for a in atoms]


def _constraints(dist, atoms):
    cons = {}
    for a in atoms:
        slot = dist.plan.slot(a.ordinal)
        if a.label not in slot:
            raise KeyError(f"unknown label {a.label!r} at slot {a.ordinal}; have {list(slot.labels)}")
        if a.ordinal - 1 in cons:
            raise ValueError(f"duplicate ordinal {a.ordinal} among event atoms")
        cons[a.ordinal - 1] = a.label
    return cons


def event_probability(dist, atoms=()):
    """Probability that every atom occurs.

    Slots without an atom are summed over; they are still observed, since
    they are part of the plan.
    """
    cons = _constraints(dist, _as_atoms(atoms))
    if not cons:
        return sum(v for _, v in dist.items())
    # itemgetter returns a bare label for one index and a tuple for several
    pick = operator.itemgetter(*cons)
    want = pick(tuple(cons.get(i) for i in range(max(cons) + 1)))
    return sum(v for o, v in dist.items() if pick(o) == want)


def conditional(dist, target, given):
    """Pr(target | given) from the joint table.

    Raises
    ------
    UndefinedConditional
        If the probability of ``given`` is at most ``EPS_ZERO``.
    """
    target, given = _as_atoms(target), _as_atoms(given)
    merged = {}
    for a in given + target:
        if a.ordinal in merged and merged[a.ordinal] != a:
            # contradictory outcomes at one slot: disjoint events
            merged = None
            break
        merged[a.ordinal] = a
    denom = event_probability(dist, given)
    if denom <= EPS_ZERO:
        raise UndefinedConditional(denom)
    if merged is None:
        _constraints(dist, target)
        return 0.0
    return event_probability(dist, merged.values()) / denom
