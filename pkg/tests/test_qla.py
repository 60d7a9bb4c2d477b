import math

import numpy as np
import pytest
from hypothesis import given, settings

from retrodictor import qla
from retrodictor.qla import (
    DensityOperator,
    DimensionError,
    InvariantError,
    Ket,
    OrthogonalityError,
    Projector,
    QLAError,
    coarsen,
    projector_from_ket,
    pvm_from_kets,
    random_density,
    random_fine_pvm,
    random_ket,
    random_partition,
    rotate_fixing_axis,
)

from conftest import S2, dims, seeds


def assert_valid_pvm(pvm):
    total = sum(b.projector.matrix for b in pvm)
    assert qla.max_norm(total - np.eye(pvm.dim)) <= 1e-10
    for a in pvm:
        P = a.projector.matrix
        assert qla.max_norm(P @ P - P) <= 1e-10
        assert qla.max_norm(P - P.conj().T) <= 1e-10
        for b in pvm:
            if a.label != b.label:
                assert qla.max_norm(P @ b.projector.matrix) <= 1e-10


class TestMatrixAlgebra:
    def test_identity_self_adjoint(self):
        np.testing.assert_array_equal(qla.adjoint(qla.identity(2)), qla.identity(2))

    def test_trace_identity(self):
        assert qla.trace(qla.identity(3)) == 3 + 0j

    def test_projector_idempotent(self):
        P = projector_from_ket(Ket([S2, 1j * S2])).matrix
        assert qla.max_norm(qla.multiply(P, P) - P) <= 1e-15

    def test_adjoint_is_conjugate_transpose(self):
        a = np.array([[1, 2j], [3, 4 - 1j]])
        np.testing.assert_array_equal(qla.adjoint(a), [[1, 3], [-2j, 4 + 1j]])

    def test_add_scale(self):
        a = qla.identity(2)
        np.testing.assert_array_equal(qla.add(a, qla.scale(a, 1j)), (1 + 1j) * np.eye(2))

    def test_max_norm(self):
        assert qla.max_norm([[1, -3j], [2, 0]]) == 3.0

    @pytest.mark.parametrize("op", [qla.multiply, qla.add])
    def test_dimension_mismatch_names_both(self, op):
        with pytest.raises(DimensionError, match=r"\(2, 2\) vs \(3, 3\)"):
            op(np.eye(2), np.eye(3))

    def test_results_are_read_only(self):
        m = qla.multiply(np.eye(2), np.eye(2))
        with pytest.raises(ValueError):
            m[0, 0] = 5


class TestObjects:
    def test_ket_norm(self):
        with pytest.raises(InvariantError, match="unit norm"):
            Ket([1, 1])
        assert Ket.normalized([1, 1]).inner(Ket([S2, S2])) == pytest.approx(1)

    def test_density_invariants(self):
        with pytest.raises(InvariantError, match="unit trace"):
            DensityOperator(np.eye(2))
        with pytest.raises(InvariantError, match="hermitian"):
            DensityOperator([[0.5, 0.1], [0.2, 0.5]])
        with pytest.raises(InvariantError, match="positive semidefinite"):
            DensityOperator([[1.5, 0], [0, -0.5]])
        assert DensityOperator.maximally_mixed(3).dim == 3

    def test_projector_rank(self):
        assert Projector(np.diag([1, 1, 0])).rank == 2
        with pytest.raises(InvariantError, match="idempotent"):
            Projector(np.diag([0.5, 1]))
        with pytest.raises(InvariantError, match="rank"):
            Projector(np.diag([1, 0]), rank=2)

    def test_projector_from_basis_ket(self):
        P = projector_from_ket(Ket([1, 0]))
        np.testing.assert_array_equal(P.matrix, [[1, 0], [0, 0]])
        assert P.rank == 1

    def test_projector_from_diagonal_ket(self):
        P = projector_from_ket(Ket([S2, S2]))
        np.testing.assert_allclose(P.matrix, [[0.5, 0.5], [0.5, 0.5]], atol=1e-15)

    def test_projector_from_y_ket(self):
        # |v><v|_{ij} = v_i conj(v_j) with v = (1, i)/sqrt2
        P = projector_from_ket(Ket([S2, 1j * S2]))
        np.testing.assert_allclose(P.matrix, [[0.5, -0.5j], [0.5j, 0.5]], atol=1e-15)

    def test_projector_from_unnormalized(self):
        with pytest.raises(InvariantError):
            projector_from_ket([1, 1])


class TestDecompositions:
    def test_standard_basis(self):
        pvm = pvm_from_kets([Ket(v) for v in np.eye(3)])
        assert pvm.labels == ("1", "2", "3")
        assert pvm.is_fine
        assert_valid_pvm(pvm)

    def test_y_basis(self, y_basis):
        assert_valid_pvm(y_basis)
        assert abs(y_basis.ket("y+").inner(y_basis.ket("y-"))) == 0

    def test_duplicate_kets(self):
        with pytest.raises(OrthogonalityError) as exc:
            pvm_from_kets([Ket([1, 0]), Ket([1, 0])])
        assert exc.value.indices == (0, 1)

    def test_incomplete(self):
        with pytest.raises(InvariantError, match="completeness"):
            pvm_from_kets([Ket([1, 0, 0]), Ket([0, 1, 0])])

    def test_coarsen_ranks(self):
        pvm = pvm_from_kets([Ket(v) for v in np.eye(3)])
        c = coarsen(pvm, [["1"], ["2", "3"]])
        assert [b.projector.rank for b in c] == [1, 2]
        assert c.labels == ("1", "2∨3")
        assert_valid_pvm(c)

    def test_coarsen_singletons_is_identity(self, y_basis):
        assert coarsen(y_basis, [["y+"], ["y-"]]) == y_basis

    def test_coarsen_everything(self, y_basis):
        c = coarsen(y_basis, [["y+", "y-"]], ["M"])
        np.testing.assert_allclose(c.projector("M").matrix, np.eye(2), atol=1e-15)

    @pytest.mark.parametrize("groups", [[["1"], ["1", "2"]], [["1"]], [["1"], ["2"], ["9"]]])
    def test_coarsen_non_partition(self, groups):
        pvm = pvm_from_kets([Ket(v) for v in np.eye(2)])
        with pytest.raises(QLAError):
            coarsen(pvm, groups)

    def test_ket_from_projector(self, y_basis):
        c = coarsen(y_basis, [["y+"], ["y-"]], ["a", "b"])
        rebuilt = qla.ProjectiveDecomposition(
            (b.label, b.projector) for b in c
        )
        k = rebuilt.ket("a")
        assert abs(k.inner(y_basis.ket("y+"))) == pytest.approx(1, abs=1e-12)


class TestRotation:
    def test_zero_angle(self, boxes):
        r = rotate_fixing_axis(boxes, "box1", [0.0])
        assert r == boxes

    def test_quarter_turn(self, boxes):
        r = rotate_fixing_axis(boxes, "box1", [math.pi / 2])
        np.testing.assert_allclose(r.ket("box2").amplitudes, [0, 0, 1], atol=1e-15)
        np.testing.assert_allclose(r.ket("box3").amplitudes, [0, -1, 0], atol=1e-15)
        assert r.block("box1").projector is boxes.block("box1").projector
        assert r.ket("box1") == boxes.ket("box1")

    def test_phase(self, boxes):
        r = rotate_fixing_axis(boxes, "box1", [(math.pi / 2, math.pi / 2)])
        np.testing.assert_allclose(r.ket("box2").amplitudes, [0, 0, 1j], atol=1e-15)

    def test_angle_count(self, boxes):
        with pytest.raises(QLAError, match="needs 1 rotation angles"):
            rotate_fixing_axis(boxes, "box1", [0.1, 0.2])

    def test_dim2_has_no_angles(self, y_basis):
        assert rotate_fixing_axis(y_basis, "y+", []) == y_basis

    def test_rejects_coarse(self, boxes):
        with pytest.raises(QLAError):
            rotate_fixing_axis(coarsen(boxes, [["box1"], ["box2", "box3"]]), "box1", [])

    def test_unknown_label(self, boxes):
        with pytest.raises(KeyError):
            rotate_fixing_axis(boxes, "box9", [0.0])

    @given(seed=seeds, dim=dims)
    @settings(max_examples=40, deadline=None)
    def test_random_rotation_valid(self, seed, dim):
        rng = np.random.default_rng(seed)
        pvm = random_fine_pvm(dim, rng)
        fixed = pvm.labels[int(rng.integers(dim))]
        n = (dim - 1) * (dim - 2) // 2
        angles = [tuple(x) for x in rng.uniform(-math.pi, math.pi, (n, 2))]
        r = rotate_fixing_axis(pvm, fixed, angles)
        assert_valid_pvm(r)
        assert r.ket(fixed) == pvm.ket(fixed)
        assert abs(r.ket(fixed).inner(pvm.ket(fixed)) - 1) <= 1e-10


class TestRandomInstances:
    @given(seed=seeds, dim=dims)
    @settings(max_examples=50, deadline=None)
    def test_generators_pass_invariants(self, seed, dim):
        rng = np.random.default_rng(seed)
        k = random_ket(dim, rng)
        assert qla.trace(projector_from_ket(k).matrix).real == pytest.approx(1, abs=1e-10)
        for rank in (1, None):
            random_density(dim, rng, rank)
        pvm = random_fine_pvm(dim, rng)
        assert_valid_pvm(pvm)
        groups = random_partition(pvm.labels, rng)
        assert sorted(sum(groups, [])) == sorted(pvm.labels)
        assert_valid_pvm(coarsen(pvm, groups))

    @given(seed=seeds, dim=dims)
    @settings(max_examples=40, deadline=None)
    def test_unchecked_constructions_pass_checks(self, seed, dim):
        # objects built without re-validation still satisfy the checked constructors
        rng = np.random.default_rng(seed)
        k = random_ket(dim, rng)
        DensityOperator(DensityOperator.from_ket(k).matrix)
        pvm = random_fine_pvm(dim, rng)
        coarse = coarsen(pvm, random_partition(pvm.labels, rng))
        for b in coarse:
            Projector(b.projector.matrix, b.projector.rank)
        qla.ProjectiveDecomposition(coarse.blocks)
