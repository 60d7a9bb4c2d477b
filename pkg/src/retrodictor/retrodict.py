"""
Closed-form retrodiction formulas, correct and naive.

Every formula here answers a question of the form "given preparation rho,
an observation of P at slot 1 and the outcome q at slot 2, how likely was
outcome p_j at slot 1?". The correct formulas (:func:`abl_fine`,
:func:`abl_coarse`, :func:`corrected_bayes`) agree with the brute-force
oracle in :mod:`retrodictor.sequence`; the naive ones
(:func:`naive_bayes`, and :func:`naive_marginal` read as the probability
of q with nothing measured first) reproduce a tempting but wrong
derivation so it can be compared against the oracle.

Undefined values (conditioning on an event of probability at most
``EPS_ZERO``) raise :class:`~retrodictor.sequence.UndefinedConditional`;
report objects store them as ``None``.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .qla import (
    Block,
    DensityOperator,
    DimensionError,
    Ket,
    ProjectiveDecomposition,
    Projector,
    QLAError,
    coarsen,
    projector_from_ket,
    pvm_from_kets,
    rotate_fixing_axis,
)
from .sequence import (
    EventAtom,
    MeasurementPlan,
    UndefinedConditional,
    ZeroProbabilityBranch,
    conditional,
    event_probability,
    joint_distribution,
    luders_update,
)
from .tolerances import EPS_CLASSICAL, EPS_ZERO

__all__ = [
    "POST_LABEL",
    "NOT_POST_LABEL",
    "RetrodictionQuery",
    "ClassicalModel",
    "DiscrepancyReport",
    "complete_postselection",
    "two_slot_plan",
    "oracle_conditional",
    "oracle_retrodictions",
    "abl_fine",
    "abl_coarse",
    "abl",
    "either_or_denominator",
    "naive_bayes",
    "unmeasured_probability",
    "naive_marginal",
    "corrected_marginal",
    "corrected_bayes",
    "margenau_discrepancy",
    "bayes_discrepancy",
    "classical_retrodict",
    "extract_classical_model",
    "rotated_basis_comparison",
    "margenau_query",
    "margenau_scenario",
    "three_box_scenario",
    "rotated_scenario",
]

POST_LABEL = "q"
NOT_POST_LABEL = "¬q"


@dataclass(frozen=True)
class RetrodictionQuery:
    """Preparation, slot-1 observation, slot-2 post-selected ket, target.

    ``slot1`` is the full observation made at slot 1, which may be fine or
    coarse; ``target_label`` is one of its blocks.
    """

    rho: DensityOperator
    slot1: ProjectiveDecomposition
    slot2_ket: Ket
    target_label: str

    def __post_init__(self):
        if self.rho.dim != self.slot1.dim:
            raise DimensionError(self.rho.dim, self.slot1.dim, "state and slot 1")
        if self.slot2_ket.dim != self.rho.dim:
            raise DimensionError(self.rho.dim, self.slot2_ket.dim, "state and post-selection")
        if self.target_label not in self.slot1:
            raise QLAError(
                f"target {self.target_label!r} is not a slot-1 label {list(self.slot1.labels)}"
            )

    def retarget(self, label):
        return RetrodictionQuery(self.rho, self.slot1, self.slot2_ket, label)


@functools.lru_cache(maxsize=256)
def complete_postselection(q):
    """{|q><q|, 1 - |q><q|} as a two-block decomposition."""
    Q = projector_from_ket(q)
    rest = Projector(np.eye(q.dim) - Q.matrix, q.dim - 1)
    return ProjectiveDecomposition([Block(POST_LABEL, Q, q), Block(NOT_POST_LABEL, rest)])


def two_slot_plan(slot1, q, completion=None):
    """Plan observing ``slot1`` then the post-selection measurement.

    ``completion`` overrides the default {Q, 1-Q} slot-2 decomposition; it
    must contain a block labelled ``POST_LABEL`` equal to |q><q|.
    """
    slot2 = complete_postselection(q) if completion is None else completion
    return MeasurementPlan([slot1, slot2])


def oracle_conditional(query, completion=None):
    """Pr(target^[1] | q^[2]) from the exact joint distribution."""
    dist = joint_distribution(query.rho, two_slot_plan(query.slot1, query.slot2_ket, completion))
    return conditional(dist, [EventAtom(1, query.target_label)], [EventAtom(2, POST_LABEL)])


def oracle_retrodictions(rho, slot1, q):
    """Pr(label^[1] | q^[2]) for every slot-1 label, from one joint table."""
    dist = joint_distribution(rho, two_slot_plan(slot1, q))
    denom = event_probability(dist, [EventAtom(2, POST_LABEL)])
    if denom <= EPS_ZERO:
        raise UndefinedConditional(denom)
    return {
        lab: event_probability(dist, [EventAtom(1, lab), EventAtom(2, POST_LABEL)]) / denom
        for lab in slot1.labels
    }


def _overlap2(q, p):
    return abs(q.inner(p)) ** 2


def abl_fine(query):
    """Retrodiction for a complete, fine slot-1 observation.

    Evaluates |<q|p_j>|^2 <p_j|rho|p_j> / sum_s |<q|p_s>|^2 <p_s|rho|p_s>
    term by term from the basis kets.
    """
    P = query.slot1
    if not P.is_fine:
        raise QLAError("abl_fine needs a fine slot-1 decomposition; use abl_coarse")
    q, rho = query.slot2_ket, query.rho
    terms = {}
    for label in P.labels:
        p = P.ket(label)
        terms[label] = _overlap2(q, p) * rho.expectation(p)
    denom = math.fsum(terms.values())
    if denom <= EPS_ZERO:
        raise UndefinedConditional(denom, "post-selected outcome")
    return terms[query.target_label] / denom


def _branch_weight(q_matrix, e, rho):
    E = e.matrix
    return float(np.trace(q_matrix @ E @ rho.matrix @ E).real)


def abl_coarse(query):
    """Retrodiction for an arbitrary (possibly coarse) slot-1 observation.

    Tr(Q E_j rho E_j) / sum_E Tr(Q E rho E), with Q = |q><q| and E ranging
    over the slot-1 blocks. Rank-1 blocks reduce this to :func:`abl_fine`.
    """
    Q = query.slot2_ket.outer()
    terms = {b.label: _branch_weight(Q, b.projector, query.rho) for b in query.slot1}
    denom = math.fsum(terms.values())
    if denom <= EPS_ZERO:
        raise UndefinedConditional(denom, "post-selected outcome")
    return terms[query.target_label] / denom


def abl(query):
    """:func:`abl_fine` for fine observations, :func:`abl_coarse` otherwise."""
    return abl_fine(query) if query.slot1.is_fine else abl_coarse(query)


def either_or_denominator(rho, P, q, label):
    """Denominator for observing only "p_j or not p_j".

    With P fine and j = ``label``:

        |<q|p_j>|^2 <p_j|rho|p_j>
            + sum_{s, s' != j} <p_s'|q><q|p_s><p_s|rho|p_s'>

    The cross terms between distinct s, s' are what separate this from the
    fine denominator.
    """
    if not P.is_fine:
        raise QLAError("either_or_denominator expects the fine basis P")
    pj = P.ket(label)
    total = _overlap2(q, pj) * rho.expectation(pj)
    others = [P.ket(lab) for lab in P.labels if lab != label]
    for ps in others:
        for ps2 in others:
            rho_s_s2 = np.vdot(ps.amplitudes, rho.matrix @ ps2.amplitudes)
            total += (ps2.inner(q) * q.inner(ps) * rho_s_s2).real
    return float(total)


def naive_bayes(query):
    """Bayes's formula with the unmeasured denominator <q|rho|q>.

    Deliberately wrong in general: the numerator describes q following an
    observation of P, the denominator q with nothing observed before. The
    value may exceed 1; it is returned as-is.
    """
    P = query.slot1
    if not P.is_fine:
        raise QLAError("naive_bayes is only defined for a fine slot-1 decomposition")
    q, rho = query.slot2_ket, query.rho
    denom = rho.expectation(q)
    if denom <= EPS_ZERO:
        raise UndefinedConditional(denom, "unmeasured post-selected outcome")
    p = P.ket(query.target_label)
    return _overlap2(q, p) * rho.expectation(p) / denom


def unmeasured_probability(rho, q):
    """<q|rho|q>: probability of q with no earlier observation."""
    return rho.expectation(q)


def naive_marginal(rho, P, q):
    """sum_s |<p_s|q>|^2 <p_s|rho|p_s> for a fine basis P.

    This is the probability of q *after* an ignored observation of P, not
    the probability of q on the unmeasured system.
    """
    if not P.is_fine:
        raise QLAError("naive_marginal expects a fine decomposition")
    return math.fsum(_overlap2(q, P.ket(lab)) * rho.expectation(P.ket(lab)) for lab in P.labels)


def corrected_marginal(rho, P, q):
    """Pr(some outcome of P at slot 1, then q at slot 2), from the oracle."""
    dist = joint_distribution(rho, two_slot_plan(P, q))
    return event_probability(dist, [EventAtom(2, POST_LABEL)])


def corrected_bayes(query):
    """Bayes's formula with the slot-1 observation kept in the condition.

    Numerator Pr(q^[2] | p_j^[1]) Pr(p_j^[1]) from chained Lüders updates,
    denominator :func:`corrected_marginal`.
    """
    denom = corrected_marginal(query.rho, query.slot1, query.slot2_ket)
    if denom <= EPS_ZERO:
        raise UndefinedConditional(denom, "slot-1 observation followed by q")
    Q = projector_from_ket(query.slot2_ket)
    try:
        prior, post = luders_update(query.rho, query.slot1.projector(query.target_label))
        likelihood, _ = luders_update(post, Q)
    except ZeroProbabilityBranch:
        return 0.0
    return likelihood * prior / denom


@dataclass(frozen=True)
class DiscrepancyReport:
    """A naive value next to the correct one and the oracle's.

    ``None`` marks an undefined value. ``gap`` is ``|naive - correct|``.
    """

    naive_value: float | None
    correct_value: float
    oracle_value: float
    gap: float | None = field(default=None)

    def __post_init__(self):
        if abs(self.correct_value - self.oracle_value) > 1e-9:
            raise ValueError(
                f"correct value {self.correct_value!r} disagrees with oracle {self.oracle_value!r}"
            )
        if self.gap is None and self.naive_value is not None:
            object.__setattr__(self, "gap", abs(self.naive_value - self.correct_value))

    @property
    def defined(self):
        return self.naive_value is not None


def margenau_discrepancy(rho, P, q):
    """Compare <q|rho|q> with the marginal summed over an observation of P.

    ``naive_value`` is the unmeasured <q|rho|q>, ``correct_value`` the
    summed marginal, ``oracle_value`` Pr(q^[2]) on the plan [P, Q]. For a
    pure state outside the basis P the gap is generically nonzero.
    """
    return DiscrepancyReport(
        naive_value=unmeasured_probability(rho, q),
        correct_value=naive_marginal(rho, P, q),
        oracle_value=corrected_marginal(rho, P, q),
    )


def bayes_discrepancy(query):
    """:func:`naive_bayes` against :func:`abl` and the oracle conditional."""
    try:
        naive = naive_bayes(query)
    except UndefinedConditional:
        naive = None
    return DiscrepancyReport(naive, abl(query), oracle_conditional(query))


# ---------------------------------------------------------------------------
# classical retrodiction

@dataclass(frozen=True)
class ClassicalModel:
    """Prior over causes and likelihood of each observation given a cause.

    ``likelihood[(q, p)]`` is Pr(q | p); for every p the values over q sum
    to one.
    """

    prior: Mapping[str, float]
    likelihood: Mapping[tuple, float]

    def __post_init__(self):
        prior = dict(self.prior)
        likelihood = {tuple(k): float(v) for k, v in dict(self.likelihood).items()}
        for name, values in (("prior", prior.values()), ("likelihood", likelihood.values())):
            for v in values:
                if not 0.0 <= v <= 1.0:
                    raise ValueError(f"{name} entry {v!r} outside [0, 1]")
        if abs(math.fsum(prior.values()) - 1.0) > EPS_CLASSICAL:
            raise ValueError(f"prior sums to {math.fsum(prior.values())!r}")
        q_labels = sorted({q for q, _ in likelihood})
        for p in prior:
            row = [likelihood.get((q, p)) for q in q_labels]
            if any(v is None for v in row):
                raise ValueError(f"likelihood is missing entries for cause {p!r}")
            if abs(math.fsum(row) - 1.0) > EPS_CLASSICAL:
                raise ValueError(f"likelihoods given {p!r} sum to {math.fsum(row)!r}")
        if any(p not in prior for _, p in likelihood):
            raise ValueError("likelihood names a cause missing from the prior")
        object.__setattr__(self, "prior", prior)
        object.__setattr__(self, "likelihood", likelihood)


def classical_retrodict(model, q_label, p_label):
    """Pr(q|p_j) Pr(p_j) / sum_s Pr(q|p_s) Pr(p_s)."""
    if p_label not in model.prior:
        raise KeyError(f"unknown cause {p_label!r}")
    terms = {p: model.likelihood[(q_label, p)] * w for p, w in model.prior.items()}
    denom = math.fsum(terms.values())
    if denom <= EPS_ZERO:
        raise UndefinedConditional(denom, f"observation {q_label!r}")
    return terms[p_label] / denom


def extract_classical_model(rho, P, Q):
    """Classical model read off a quantum two-slot setup.

    Prior <p_s|rho|p_s> over the fine basis ``P``; likelihood
    <p_s|Q_k|p_s> for each block of ``Q`` (|<q_k|p_s>|^2 when Q is fine).
    """
    if not P.is_fine:
        raise QLAError("extract_classical_model needs a fine slot-1 basis")
    prior = {lab: rho.expectation(P.ket(lab)) for lab in P.labels}
    # clamp round-off so the model's [0, 1] checks hold
    prior = {k: min(max(v, 0.0), 1.0) for k, v in prior.items()}
    likelihood = {}
    for b in Q:
        for lab in P.labels:
            v = P.ket(lab).amplitudes
            likelihood[(b.label, lab)] = min(max(float(np.vdot(v, b.projector.matrix @ v).real), 0.0), 1.0)
    return ClassicalModel(prior, likelihood)


def rotated_basis_comparison(rho, P, q, angles, fixed_label=None):
    """ABL value for the fixed vector under P and under a rotated P'.

    P' keeps the ket ``fixed_label`` (default: P's first label) and rotates
    the rest by :func:`~retrodictor.qla.rotate_fixing_axis`.

    Returns
    -------
    (value_P, value_Pprime) : tuple of float
    """
    fixed_label = P.labels[0] if fixed_label is None else fixed_label
    P_rot = rotate_fixing_axis(P, fixed_label, angles)
    value_P = abl_fine(RetrodictionQuery(rho, P, q, fixed_label))
    value_rot = abl_fine(RetrodictionQuery(rho, P_rot, q, fixed_label))
    return value_P, value_rot


# ---------------------------------------------------------------------------
# named scenarios

_S2 = 1 / math.sqrt(2)
_S3 = 1 / math.sqrt(3)


def margenau_query():
    """Spin-1/2 prepared in z+, y observed, z- post-selected, target y+."""
    z = pvm_from_kets([Ket([1, 0]), Ket([0, 1])], ["z+", "z-"])
    y = pvm_from_kets([Ket([_S2, 1j * _S2]), Ket([_S2, -1j * _S2])], ["y+", "y-"])
    rho = DensityOperator.from_ket(z.ket("z+"))
    return RetrodictionQuery(rho, y, z.ket("z-"), "y+")


@dataclass(frozen=True)
class MargenauReport:
    naive_value: float | None  # undefined: <z-|rho|z-> = 0
    naive_denominator: float
    abl_value: float
    oracle_value: float
    marginal: DiscrepancyReport


def margenau_scenario():
    q = margenau_query()
    report = bayes_discrepancy(q)
    return MargenauReport(
        naive_value=report.naive_value,
        naive_denominator=unmeasured_probability(q.rho, q.slot2_ket),
        abl_value=report.correct_value,
        oracle_value=report.oracle_value,
        marginal=margenau_discrepancy(q.rho, q.slot1, q.slot2_ket),
    )


@functools.lru_cache(maxsize=1)
def _three_box_setup():
    # immutable inputs (read-only arrays, frozen objects), built once
    e = np.eye(3)
    boxes = pvm_from_kets([Ket(e[i]) for i in range(3)], ["box1", "box2", "box3"])
    psi = Ket([_S3, _S3, _S3])
    phi = Ket([_S3, _S3, -_S3])
    return boxes, psi, phi


def _either_or(P, label):
    rest = [lab for lab in P.labels if lab != label]
    return coarsen(P, [[label], rest], [label, "¬" + label])


@dataclass(frozen=True)
class ThreeBoxReport:
    """Coarse "box j or not" retrodictions against fine ones.

    ``coarse`` maps box1 and box2 to (closed form, oracle) under the
    observation {P_j, 1 - P_j}; ``fine`` maps each box to (closed form,
    oracle) under the full three-outcome observation.
    """

    psi: Ket
    phi: Ket
    coarse: Mapping[str, tuple]
    fine: Mapping[str, tuple]

    @property
    def coarse_fine_gap(self):
        return self.coarse["box1"][0] - self.fine["box1"][0]


def three_box_scenario():
    """Pre-select (1,1,1)/sqrt3, post-select (1,1,-1)/sqrt3 over three boxes."""
    boxes, psi, phi = _three_box_setup()
    rho = DensityOperator.from_ket(psi)
    coarse = {}
    for label in ("box1", "box2"):
        query = RetrodictionQuery(rho, _either_or(boxes, label), phi, label)
        coarse[label] = (abl_coarse(query), oracle_conditional(query))
    oracle = oracle_retrodictions(rho, boxes, phi)
    fine = {
        label: (abl_fine(RetrodictionQuery(rho, boxes, phi, label)), oracle[label])
        for label in boxes.labels
    }
    return ThreeBoxReport(psi, phi, coarse, fine)


@dataclass(frozen=True)
class RotatedReport:
    angles: tuple
    value_P: float
    value_Pprime: float
    oracle_P: float
    oracle_Pprime: float
    control_gap: float  # zero-angle rotation

    @property
    def gap(self):
        return abs(self.value_P - self.value_Pprime)


def rotated_scenario(angle=math.pi / 4):
    """Three-box states; rotate boxes 2 and 3 about box 1 by ``angle``."""
    boxes, psi, phi = _three_box_setup()
    rho = DensityOperator.from_ket(psi)
    query = RetrodictionQuery(rho, boxes, phi, "box1")
    rotated = RetrodictionQuery(rho, rotate_fixing_axis(boxes, "box1", [angle]), phi, "box1")
    control = RetrodictionQuery(rho, rotate_fixing_axis(boxes, "box1", [0.0]), phi, "box1")
    value_P = abl_fine(query)
    return RotatedReport(
        angles=(angle,),
        value_P=value_P,
        value_Pprime=abl_fine(rotated),
        oracle_P=oracle_conditional(query),
        oracle_Pprime=oracle_conditional(rotated),
        control_gap=abs(value_P - abl_fine(control)),
    )
