"""
Randomized equivalence checks between closed forms and the oracle.

Each random instance is first drawn as a plain JSON-compatible dict and
only then turned into quantum objects, so a serialized instance replays to
bit-identical deviations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._complexjson import decode_complex, encode_complex
from .qla import DensityOperator, Ket, coarsen, pvm_from_kets, random_partition
from .retrodict import (
    POST_LABEL,
    RetrodictionQuery,
    abl_coarse,
    abl_fine,
    classical_retrodict,
    complete_postselection,
    corrected_bayes,
    corrected_marginal,
    extract_classical_model,
    naive_marginal,
    oracle_conditional,
)
from .sequence import UndefinedConditional

#: tolerance per checked property
TOLERANCES = {
    "abl_fine~oracle": 1e-9,
    "abl_coarse~oracle": 1e-9,
    "corrected_bayes~oracle": 1e-9,
    "corrected_bayes~abl": 1e-10,
    "classical~abl_fine": 1e-12,
    "naive_marginal~corrected_marginal": 1e-10,
    "sum abl_fine": 1e-9,
    "sum abl_coarse": 1e-9,
}


def random_instance(rng, max_dim, min_dim=2):
    """Draw one instance as a serializable dict."""
    dim = int(rng.integers(min_dim, max_dim + 1))
    rank = int(rng.integers(1, dim + 1))
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    rho = (rho + rho.conj().T) / 2
    rho = rho / np.trace(rho).real
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    u, r = np.linalg.qr(z)
    u = u * (np.diag(r) / np.abs(np.diag(r)))
    kets = [u[:, i] / np.linalg.norm(u[:, i]) for i in range(dim)]
    labels = [f"p{i + 1}" for i in range(dim)]
    q = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    q = q / np.linalg.norm(q)
    return {
        "dim": dim,
        "rho": encode_complex(rho),
        "basis": encode_complex(kets),
        "labels": labels,
        "groups": random_partition(labels, rng),
        "post": encode_complex(q),
    }


@dataclass(frozen=True)
class Instance:
    rho: DensityOperator
    fine: object
    coarse: object
    q: Ket

    @classmethod
    def from_dict(cls, data):
        P = pvm_from_kets([Ket(k) for k in decode_complex(data["basis"])], data["labels"])
        return cls(
            rho=DensityOperator(decode_complex(data["rho"])),
            fine=P,
            coarse=coarsen(P, data["groups"]),
            q=Ket(decode_complex(data["post"])),
        )


def _defined(fn, *args):
    try:
        return fn(*args)
    except UndefinedConditional:
        return None


def check_instance(data):
    """Deviation of every property on one instance.

    Returns
    -------
    dict
        Property name -> largest absolute deviation over targets. A value of
        ``math.inf`` means a closed form was defined where the oracle was not
        (or the reverse).
    """
    inst = Instance.from_dict(data)
    dev = {name: 0.0 for name in TOLERANCES}

    def record(name, a, b):
        if (a is None) != (b is None):
            dev[name] = math.inf
        elif a is not None:
            dev[name] = max(dev[name], abs(a - b))

    model = extract_classical_model(inst.rho, inst.fine, complete_postselection(inst.q))
    for P, closed, key in ((inst.fine, abl_fine, "abl_fine"), (inst.coarse, abl_coarse, "abl_coarse")):
        total = 0.0
        for label in P.labels:
            query = RetrodictionQuery(inst.rho, P, inst.q, label)
            oracle = _defined(oracle_conditional, query)
            value = _defined(closed, query)
            corrected = _defined(corrected_bayes, query)
            record(f"{key}~oracle", value, oracle)
            record("corrected_bayes~oracle", corrected, oracle)
            record("corrected_bayes~abl", corrected, value)
            if P is inst.fine:
                record("classical~abl_fine", _defined(classical_retrodict, model, POST_LABEL, label), value)
            total += value or 0.0
        if value is not None:
            dev[f"sum {key}"] = abs(total - 1.0)
    record(
        "naive_marginal~corrected_marginal",
        naive_marginal(inst.rho, inst.fine, inst.q),
        corrected_marginal(inst.rho, inst.fine, inst.q),
    )
    return dev


def failed_properties(deviations):
    return [name for name, d in deviations.items() if not d <= TOLERANCES[name]]


@dataclass
class CheckSummary:
    seed: int
    trials: int
    max_dim: int
    passed: int = 0
    failed: int = 0
    worst: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    @property
    def worst_deviation(self):
        return max(self.worst.values(), default=0.0)

    @property
    def ok(self):
        return self.failed == 0


def oracle_check(seed=1, trials=100, max_dim=4):
    """Run ``trials`` random instances; deterministic for a given seed."""
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    if not 2 <= max_dim <= 8:
        raise ValueError(f"max_dim must be in [2, 8], got {max_dim}")
    rng = np.random.default_rng(seed)
    summary = CheckSummary(seed, trials, max_dim, worst={name: 0.0 for name in TOLERANCES})
    for _ in range(trials):
        data = random_instance(rng, max_dim)
        dev = check_instance(data)
        for name, d in dev.items():
            summary.worst[name] = max(summary.worst[name], d)
        bad = failed_properties(dev)
        if bad:
            summary.failed += 1
            summary.failures.append({"instance": data, "failed": bad, "deviations": dev})
        else:
            summary.passed += 1
    return summary
