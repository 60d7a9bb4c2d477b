"""
Small dense complex linear algebra and validated quantum objects.

Matrices are plain ``numpy`` complex128 arrays; every quantum object
(:class:`Ket`, :class:`DensityOperator`, :class:`Projector`,
:class:`ProjectiveDecomposition`) checks its invariants on construction
and stores read-only copies of its data, so instances can be shared
freely.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .tolerances import EPS_NORM, EPS_PSD, EPS_RANK, EPS_STRUCT

__all__ = [
    "QLAError",
    "DimensionError",
    "InvariantError",
    "OrthogonalityError",
    "as_matrix",
    "identity",
    "multiply",
    "add",
    "adjoint",
    "scale",
    "trace",
    "max_norm",
    "Ket",
    "DensityOperator",
    "Projector",
    "Block",
    "ProjectiveDecomposition",
    "projector_from_ket",
    "pvm_from_kets",
    "coarsen",
    "givens_planes",
    "rotate_fixing_axis",
    "random_ket",
    "random_density",
    "random_fine_pvm",
    "random_partition",
]


class QLAError(ValueError):
    """Base class for invalid linear-algebra input."""


class DimensionError(QLAError):
    def __init__(self, left, right, what="operands"):
        self.left = left
        self.right = right
        super().__init__(f"dimension mismatch between {what}: {left} vs {right}")


class InvariantError(QLAError):
    """A constructed object violates one of its structural invariants.

    ``invariant`` names the violated property, ``deviation`` is the measured
    defect when there is one.
    """

    def __init__(self, invariant, message, deviation=None):
        self.invariant = invariant
        self.deviation = deviation
        super().__init__(f"{invariant}: {message}")


class OrthogonalityError(InvariantError):
    def __init__(self, i, j, deviation):
        self.indices = (i, j)
        super().__init__(
            "orthogonality",
            f"elements {i} and {j} overlap by {deviation:.3e}",
            deviation,
        )


def _frozen(a):
    a = np.array(a, dtype=np.complex128)
    a.setflags(write=False)
    return a


# ---------------------------------------------------------------------------
# matrix algebra

def as_matrix(a):
    """Return ``a`` as a read-only square complex128 array."""
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise QLAError(f"expected a non-empty square matrix, got shape {m.shape}")
    return _frozen(m)


def _conformable(a, b):
    if a.shape != b.shape:
        raise DimensionError(a.shape, b.shape)


def identity(dim):
    if dim < 1:
        raise QLAError(f"dimension must be positive, got {dim}")
    return _frozen(np.eye(dim))


def multiply(a, b):
    a, b = as_matrix(a), as_matrix(b)
    _conformable(a, b)
    return _frozen(a @ b)


def add(a, b):
    a, b = as_matrix(a), as_matrix(b)
    _conformable(a, b)
    return _frozen(a + b)


def adjoint(a):
    return _frozen(as_matrix(a).conj().T)


def scale(a, c):
    return _frozen(complex(c) * as_matrix(a))


def trace(a):
    return complex(np.trace(as_matrix(a)))


def max_norm(a):
    """Largest absolute entry."""
    a = np.asarray(a)
    return float(np.abs(a).max()) if a.size else 0.0


# ---------------------------------------------------------------------------
# quantum objects

@dataclass(frozen=True, eq=False)
class Ket:
    """Unit vector in C^dim."""

    amplitudes: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.amplitudes, dtype=np.complex128)
        if v.ndim != 1 or v.size == 0:
            raise QLAError(f"ket amplitudes must be a non-empty vector, got shape {v.shape}")
        defect = abs(float(np.vdot(v, v).real) - 1.0)
        if defect > EPS_NORM:
            raise InvariantError("unit norm", f"|<v|v> - 1| = {defect:.3e}", defect)
        object.__setattr__(self, "amplitudes", _frozen(v))

    @classmethod
    def normalized(cls, amplitudes):
        v = np.asarray(amplitudes, dtype=np.complex128)
        n = np.linalg.norm(v)
        if n == 0:
            raise QLAError("cannot normalize the zero vector")
        return cls(v / n)

    @property
    def dim(self):
        return self.amplitudes.size

    def inner(self, other):
        """<self|other>."""
        if other.dim != self.dim:
            raise DimensionError(self.dim, other.dim, "kets")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def outer(self):
        v = self.amplitudes
        return np.outer(v, v.conj())

    def __eq__(self, other):
        if not isinstance(other, Ket):
            return NotImplemented
        return np.array_equal(self.amplitudes, other.amplitudes)

    def __hash__(self):
        return hash(self.amplitudes.tobytes())

    def __repr__(self):
        return f"Ket({np.array2string(self.amplitudes, precision=4)})"


def _hermitian_defect(m):
    return max_norm(m - m.conj().T)


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Hermitian, positive semidefinite, unit-trace matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.matrix)
        defect = _hermitian_defect(m)
        if defect > EPS_STRUCT:
            raise InvariantError("hermitian", f"||M - M^+||_max = {defect:.3e}", defect)
        tr = np.trace(m)
        defect = abs(tr - 1.0)
        if defect > EPS_STRUCT:
            raise InvariantError("unit trace", f"Tr M = {tr:.12g}", defect)
        lowest = float(np.linalg.eigvalsh(m)[0])
        if lowest < -EPS_PSD:
            raise InvariantError(
                "positive semidefinite", f"smallest eigenvalue {lowest:.3e}", -lowest
            )
        object.__setattr__(self, "matrix", m)

    @classmethod
    def _unchecked(cls, matrix):
        # takes ownership of a fresh complex128 array that is valid by
        # construction (Lüders post-states)
        matrix.setflags(write=False)
        self = object.__new__(cls)
        object.__setattr__(self, "matrix", matrix)
        return self

    @classmethod
    def from_ket(cls, ket):
        # |v><v| is Hermitian and PSD, with trace within EPS_NORM of 1
        return cls._unchecked(ket.outer())

    @classmethod
    def maximally_mixed(cls, dim):
        return cls(np.eye(dim) / dim)

    @property
    def dim(self):
        return self.matrix.shape[0]

    def expectation(self, ket):
        """<v|rho|v> as a real number."""
        v = ket.amplitudes
        if v.size != self.dim:
            raise DimensionError(self.dim, v.size, "state and ket")
        return float(np.vdot(v, self.matrix @ v).real)

    def __eq__(self, other):
        if not isinstance(other, DensityOperator):
            return NotImplemented
        return np.array_equal(self.matrix, other.matrix)

    def __hash__(self):
        return hash(self.matrix.tobytes())


@dataclass(frozen=True, eq=False)
class Projector:
    """Orthogonal projector of a given rank.

    ``rank`` defaults to the rounded trace and must agree with it.
    """

    matrix: np.ndarray
    rank: int | None = None

    def __post_init__(self):
        m = as_matrix(self.matrix)
        defect = _hermitian_defect(m)
        if defect > EPS_STRUCT:
            raise InvariantError("hermitian", f"||P - P^+||_max = {defect:.3e}", defect)
        defect = max_norm(m @ m - m)
        if defect > EPS_STRUCT:
            raise InvariantError("idempotent", f"||P^2 - P||_max = {defect:.3e}", defect)
        tr = float(np.trace(m).real)
        rank = round(tr) if self.rank is None else int(self.rank)
        if rank < 0 or abs(tr - rank) > EPS_RANK:
            raise InvariantError("rank", f"Tr P = {tr:.12g} but rank = {rank}", abs(tr - rank))
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "rank", rank)

    @classmethod
    def _unchecked(cls, matrix, rank):
        # takes ownership of a fresh array that is a projector by construction
        matrix.setflags(write=False)
        self = object.__new__(cls)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "rank", rank)
        return self

    @property
    def dim(self):
        return self.matrix.shape[0]

    def __eq__(self, other):
        if not isinstance(other, Projector):
            return NotImplemented
        return self.rank == other.rank and np.array_equal(self.matrix, other.matrix)

    def __hash__(self):
        return hash(self.matrix.tobytes())


class Block(NamedTuple):
    label: str
    projector: Projector
    ket: Ket | None = None  # kept for rank-1 blocks built from kets


class ProjectiveDecomposition:
    """Complete set of mutually orthogonal, labelled projectors (a PVM).

    A fine decomposition (all blocks rank 1) represents a non-degenerate
    observable; coarser ones represent partial observations such as
    "p_j or not p_j".

    Parameters
    ----------
    blocks : iterable of Block or (label, Projector[, Ket]) tuples
        Blocks in their canonical order; labels must be unique strings.
    _orthogonal : bool
        Internal. Set by constructors that have already verified mutual
        orthogonality more cheaply (from a ket Gram matrix, or by merging
        blocks of a checked decomposition); completeness is still checked.
    """

    __slots__ = ("_blocks", "_index", "_labels", "dim")

    def __init__(self, blocks, *, _orthogonal=False):
        blocks = tuple(Block(*b) for b in blocks)
        if not blocks:
            raise QLAError("a decomposition needs at least one block")
        dim = blocks[0].projector.dim
        index = {}
        for i, b in enumerate(blocks):
            if not isinstance(b.label, str):
                raise QLAError(f"block labels must be strings, got {b.label!r}")
            if b.label in index:
                raise QLAError(f"duplicate block label {b.label!r}")
            if b.projector.dim != dim:
                raise DimensionError(dim, b.projector.dim, f"blocks 0 and {i}")
            if b.ket is not None and b.ket.dim != dim:
                raise DimensionError(dim, b.ket.dim, f"block {b.label!r} and its ket")
            index[b.label] = i
        mats = [b.projector.matrix for b in blocks]
        if len(mats) > 1 and not _orthogonal:
            # block (i, j) of the product is P_i P_j
            prods = np.abs(np.vstack(mats) @ np.hstack(mats))
            for i in range(len(mats)):
                prods[i * dim:(i + 1) * dim, i * dim:(i + 1) * dim] = 0.0
            if prods.max() > EPS_STRUCT:
                r, c = np.unravel_index(int(prods.argmax()), prods.shape)
                i, j = sorted((int(r) // dim, int(c) // dim))
                raise OrthogonalityError(i, j, float(prods.max()))
        total = sum(mats)
        defect = max_norm(total - np.eye(dim))
        if defect > EPS_STRUCT:
            raise InvariantError("completeness", f"||sum P_i - I||_max = {defect:.3e}", defect)
        self._blocks = blocks
        self._index = index
        self._labels = tuple(b.label for b in blocks)
        self.dim = dim

    @property
    def blocks(self):
        return self._blocks

    @property
    def labels(self):
        return self._labels

    @property
    def is_fine(self):
        return all(b.projector.rank == 1 for b in self._blocks)

    def __len__(self):
        return len(self._blocks)

    def __iter__(self):
        return iter(self._blocks)

    def __contains__(self, label):
        return label in self._index

    def block(self, label):
        try:
            return self._blocks[self._index[label]]
        except KeyError:
            raise KeyError(f"unknown block label {label!r}; have {list(self.labels)}") from None

    def projector(self, label):
        return self.block(label).projector

    def ket(self, label):
        """Unit vector spanning a rank-1 block.

        Returns the stored ket when the block was built from one, otherwise
        the normalized largest column of the projector.
        """
        b = self.block(label)
        if b.ket is not None:
            return b.ket
        if b.projector.rank != 1:
            raise QLAError(f"block {label!r} has rank {b.projector.rank}, not 1")
        m = b.projector.matrix
        col = m[:, int(np.argmax(np.linalg.norm(m, axis=0)))]
        return Ket.normalized(col)

    def __eq__(self, other):
        if not isinstance(other, ProjectiveDecomposition):
            return NotImplemented
        return self.labels == other.labels and all(
            a.projector == b.projector for a, b in zip(self._blocks, other._blocks)
        )

    def __hash__(self):
        return hash(self.labels)

    def __repr__(self):
        ranks = ", ".join(f"{b.label}:{b.projector.rank}" for b in self._blocks)
        return f"ProjectiveDecomposition(dim={self.dim}, blocks=[{ranks}])"


def projector_from_ket(v):
    """|v><v| as a rank-1 :class:`Projector`."""
    if not isinstance(v, Ket):
        v = Ket(v)
    # |v><v| with |<v|v> - 1| <= EPS_NORM is idempotent to within EPS_NORM
    return Projector._unchecked(v.outer(), 1)


def pvm_from_kets(kets, labels=None):
    """Fine decomposition from a complete orthonormal list of kets.

    Labels default to ``"1", "2", ...``.
    """
    kets = [k if isinstance(k, Ket) else Ket(k) for k in kets]
    if not kets:
        raise QLAError("need at least one ket")
    dim = kets[0].dim
    for i, k in enumerate(kets):
        if k.dim != dim:
            raise DimensionError(dim, k.dim, f"kets 0 and {i}")
    k = np.array([v.amplitudes for v in kets])
    gram = np.abs(k.conj() @ k.T)
    np.fill_diagonal(gram, 0.0)
    if gram.size and gram.max() > EPS_STRUCT:
        i, j = sorted(np.unravel_index(int(gram.argmax()), gram.shape))
        raise OrthogonalityError(int(i), int(j), float(gram.max()))
    if len(kets) != dim:
        raise InvariantError(
            "completeness", f"{len(kets)} orthonormal kets cannot span dimension {dim}"
        )
    if labels is None:
        labels = [str(i + 1) for i in range(dim)]
    labels = list(labels)
    if len(labels) != len(kets):
        raise QLAError(f"got {len(labels)} labels for {len(kets)} kets")
    # ||P_i P_j||_max <= |<k_i|k_j>|, so the Gram check covers the projectors
    return ProjectiveDecomposition(
        (Block(lab, projector_from_ket(k), k) for lab, k in zip(labels, kets)),
        _orthogonal=True,
    )


def coarsen(pvm, groups, labels=None):
    """Merge blocks of ``pvm`` according to a partition of its labels.

    Parameters
    ----------
    pvm : ProjectiveDecomposition
    groups : sequence of sequences of str
        Must partition ``pvm.labels``.
    labels : sequence of str, optional
        Output labels; default joins each group's labels with ``"∨"``.
    """
    groups = [list(g) for g in groups]
    seen = []
    for g in groups:
        if not g:
            raise QLAError("empty group in partition")
        for lab in g:
            if lab not in pvm:
                raise QLAError(f"partition names unknown label {lab!r}")
            if lab in seen:
                raise QLAError(f"label {lab!r} appears in more than one group")
            seen.append(lab)
    missing = [lab for lab in pvm.labels if lab not in seen]
    if missing:
        raise QLAError(f"partition misses labels {missing}")
    if labels is None:
        labels = ["∨".join(g) for g in groups]
    labels = list(labels)
    if len(labels) != len(groups):
        raise QLAError(f"got {len(labels)} labels for {len(groups)} groups")
    out = []
    for lab, g in zip(labels, groups):
        members = [pvm.block(x) for x in g]
        if len(members) == 1:
            b = members[0]
            out.append(Block(lab, b.projector, b.ket))
            continue
        # a sum of mutually orthogonal projectors is a projector
        m = sum(b.projector.matrix for b in members)
        out.append(Block(lab, Projector._unchecked(m, sum(b.projector.rank for b in members))))
    return ProjectiveDecomposition(out, _orthogonal=True)


def givens_planes(m):
    """Canonical order of coordinate planes for rotations of C^m."""
    return list(itertools.combinations(range(m), 2))


def _givens(m, a, b, theta, phi):
    g = np.eye(m, dtype=np.complex128)
    c, s = math.cos(theta), math.sin(theta)
    g[a, a] = c
    g[b, b] = c
    g[b, a] = cmath.exp(1j * phi) * s
    g[a, b] = -cmath.exp(-1j * phi) * s
    return g


def rotate_fixing_axis(pvm, fixed_label, angles):
    """Rotate a fine basis while keeping one of its vectors.

    The kets other than ``fixed_label`` span the orthogonal complement of the
    fixed ket. They are rotated by a product of Givens rotations, one per
    plane of :func:`givens_planes` (``m = dim - 1``), applied in that order;
    rotation ``(a, b)`` with angle ``theta`` and phase ``phi`` maps

        k_a -> cos(theta) k_a + exp(i phi) sin(theta) k_b
        k_b -> -exp(-i phi) sin(theta) k_a + cos(theta) k_b

    Parameters
    ----------
    pvm : ProjectiveDecomposition
        Fine decomposition.
    fixed_label : str
        Block kept unchanged (the very same stored ket and projector).
    angles : sequence of float or (float, float)
        ``theta`` or ``(theta, phi)`` per plane, ``m(m-1)/2`` entries.

    Returns
    -------
    ProjectiveDecomposition
        Same labels and order as ``pvm``.
    """
    if not pvm.is_fine:
        raise QLAError("rotate_fixing_axis needs a fine decomposition")
    fixed = pvm.block(fixed_label)
    others = [b for b in pvm if b.label != fixed_label]
    m = len(others)
    planes = givens_planes(m)
    angles = list(angles)
    if len(angles) != len(planes):
        raise QLAError(
            f"dimension {pvm.dim} needs {len(planes)} rotation angles, got {len(angles)}"
        )
    u = np.eye(m, dtype=np.complex128)
    for (a, b), ang in zip(planes, angles):
        theta, phi = (float(ang), 0.0) if np.isscalar(ang) else map(float, ang)
        u = u @ _givens(m, a, b, theta, phi)
    basis = np.column_stack([pvm.ket(b.label).amplitudes for b in others]) if m else None
    rotated = {}
    for i, b in enumerate(others):
        rotated[b.label] = Ket(basis @ u[:, i])
    out = []
    for b in pvm:
        if b.label == fixed_label:
            out.append(Block(fixed.label, fixed.projector, pvm.ket(fixed_label)))
        else:
            k = rotated[b.label]
            out.append(Block(b.label, projector_from_ket(k), k))
    # unitary images of an orthonormal basis stay orthonormal
    result = ProjectiveDecomposition(out, _orthogonal=True)
    assert result.block(fixed_label).projector is fixed.projector
    return result


# ---------------------------------------------------------------------------
# random instances

def _ginibre(dim, rng, cols=None):
    cols = dim if cols is None else cols
    return rng.standard_normal((dim, cols)) + 1j * rng.standard_normal((dim, cols))


def random_ket(dim, rng):
    return Ket.normalized(_ginibre(dim, rng, 1)[:, 0])


def random_density(dim, rng, rank=None):
    """Random state; ``rank=1`` gives a pure state, default full rank."""
    rank = dim if rank is None else rank
    g = _ginibre(dim, rng, rank)
    m = g @ g.conj().T
    m = (m + m.conj().T) / 2
    return DensityOperator(m / np.trace(m).real)


def random_fine_pvm(dim, rng, labels=None):
    """Haar-like random orthonormal basis via QR of a Ginibre matrix."""
    q, r = np.linalg.qr(_ginibre(dim, rng))
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    return pvm_from_kets([Ket.normalized(q[:, i]) for i in range(dim)], labels)


def random_partition(labels: Sequence[str], rng) -> list[list[str]]:
    """Random partition of ``labels`` into contiguous-in-shuffle groups."""
    labels = list(labels)
    order = [labels[i] for i in rng.permutation(len(labels))]
    n_groups = int(rng.integers(1, len(labels) + 1))
    cuts = sorted(rng.choice(np.arange(1, len(labels)), n_groups - 1, replace=False)) if n_groups > 1 else []
    groups, start = [], 0
    for c in list(cuts) + [len(order)]:
        groups.append(order[start:c])
        start = c
    # keep each group in the decomposition's own order
    return [sorted(g, key=labels.index) for g in groups]
