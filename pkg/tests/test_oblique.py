import numpy as np
import pytest
from numpy.testing import assert_allclose

from shortops import (
    CertificateMismatch,
    CompatibilitySolveFailed,
    SubspaceSplit,
    build_special_projection,
    compatibility_report,
    max_abs,
    partition,
    short_pseudo,
    short_via_projection,
    validate_psd,
    verify_inverse_identity,
)
from shortops.instances import instance_stream, random_psd

A2 = validate_psd([[2.0, 1.0], [1.0, 1.0]])
SPLIT2 = SubspaceSplit(dim=2, n1=1)


class TestBuildSpecialProjection:
    def test_canonical_2x2(self):
        q = build_special_projection(A2, SPLIT2)
        assert_allclose(q.q_hat, [[1.0]])
        assert_allclose(q.q_full, [[0.0, 0.0], [1.0, 1.0]])
        rotated = A2.entries
        assert max_abs(rotated @ q.q_full - q.q_full.T @ rotated) <= 1e-14

    def test_block_diagonal_gives_orthogonal_projection(self, rng):
        a11 = random_psd(2, 2, rng)
        op = validate_psd(np.block([
            [a11, np.zeros((2, 2))],
            [np.zeros((2, 2)), np.eye(2)],
        ]))
        q = build_special_projection(op, SubspaceSplit(dim=4, n1=2))
        assert_allclose(q.q_hat, np.zeros((2, 2)))
        expected_p2 = np.diag([0.0, 0.0, 1.0, 1.0])
        assert_allclose(q.q_full, expected_p2)

    def test_rank_deficient_trailing(self):
        op = validate_psd([[1.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 0.0]])
        q = build_special_projection(op, SubspaceSplit(dim=3, n1=1))
        assert_allclose(q.q_hat, [[1.0], [0.0]])

    def test_ill_conditioned_solve_fails(self):
        from test_shorting import ill_conditioned_instance

        op, split = ill_conditioned_instance()
        with pytest.raises(CompatibilitySolveFailed):
            build_special_projection(op, split)


class TestProjectionLaws:
    @pytest.mark.parametrize("seed", range(4))
    def test_defining_relations(self, seed):
        for a, split in instance_stream(8, seed=900 + seed):
            q = build_special_projection(a, split)
            qf = q.q_full
            dim, n1 = split.dim, split.n1
            scale = 1e-8 * (1.0 + max_abs(qf))
            assert max_abs(qf @ qf - qf) <= scale
            p1 = np.zeros((dim, dim))
            p1[:n1, :n1] = np.eye(n1)
            p2 = np.eye(dim) - p1
            assert max_abs(p1 @ qf) == 0.0
            assert max_abs(qf @ p2 - p2) == 0.0
            rotated = split.rotate(a.entries)
            assert max_abs(rotated @ qf - qf.T @ rotated) <= 1e-8 * (1.0 + a.norm)

    @pytest.mark.parametrize("seed", range(4))
    def test_complement_relations(self, seed):
        for a, split in instance_stream(8, seed=910 + seed):
            q = build_special_projection(a, split)
            e = q.complement()
            scale = 1e-8 * (1.0 + max_abs(q.q_full))
            assert max_abs(q.q_full @ e) <= scale
            assert max_abs(e @ q.q_full) <= scale
            assert max_abs(e @ e - e) <= scale

    def test_kernel_condition(self):
        for a, split in instance_stream(8, seed=920):
            q = build_special_projection(a, split)
            a21 = partition(a, split).a21
            _, sv, vt = np.linalg.svd(a21)
            cutoff = 1e-12 * (1.0 + (sv.max() if sv.size else 0.0))
            rank = int(np.sum(sv > cutoff))
            for v in vt[rank:]:
                assert np.linalg.norm(q.q_hat @ v) <= 1e-8


class TestShortViaProjection:
    def test_canonical_2x2(self):
        q = build_special_projection(A2, SPLIT2)
        e = q.complement()
        assert_allclose(e, [[1.0, 0.0], [-1.0, 0.0]])
        result = short_via_projection(A2, q)
        assert_allclose(result.shorted.entries, [[1.0, 0.0], [0.0, 0.0]])
        assert result.method == "oblique"

    def test_identity(self):
        op = validate_psd(np.eye(3))
        split = SubspaceSplit(dim=3, n1=1)
        result = short_via_projection(op, build_special_projection(op, split))
        assert_allclose(result.shorted.entries, np.diag([1.0, 0.0, 0.0]))

    def test_decoupled(self, rng):
        a11 = random_psd(2, 2, rng)
        op = validate_psd(np.block([
            [a11, np.zeros((2, 2))],
            [np.zeros((2, 2)), np.eye(2)],
        ]))
        split = SubspaceSplit(dim=4, n1=2)
        result = short_via_projection(op, build_special_projection(op, split))
        assert_allclose(result.h1_block, a11, atol=1e-14)

    def test_reuse_against_other_operator_rejected(self):
        q = build_special_projection(A2, SPLIT2)
        other = validate_psd([[5.0, 0.1], [0.1, 3.0]])
        with pytest.raises(CertificateMismatch):
            short_via_projection(other, q)

    @pytest.mark.parametrize("seed", range(4))
    def test_agrees_with_pseudo(self, seed):
        for a, split in instance_stream(8, seed=930 + seed):
            via_q = short_via_projection(a, build_special_projection(a, split))
            direct = short_pseudo(a, split)
            assert max_abs(via_q.shorted.entries - direct.shorted.entries) <= 1e-6 * a.norm


class TestInverseIdentity:
    def test_orthogonal_projection_exact(self):
        op = validate_psd(np.diag([1.0, 2.0, 3.0]))
        q = build_special_projection(op, SubspaceSplit(dim=3, n1=1))
        assert verify_inverse_identity(q) == 0.0

    def test_canonical_2x2(self):
        q = build_special_projection(A2, SPLIT2)
        assert verify_inverse_identity(q) <= 1e-15

    @pytest.mark.parametrize("seed", range(4))
    def test_random_dim8(self, seed):
        rng = np.random.default_rng(940 + seed)
        a = validate_psd(random_psd(8, 8, rng))
        q = build_special_projection(a, SubspaceSplit(dim=8, n1=3))
        assert verify_inverse_identity(q) <= 1e-10 * (1.0 + q.certificates.q_hat_norm**2)


class TestCongruenceIdentity:
    @pytest.mark.parametrize("seed", range(4))
    def test_rebuilds_operator(self, seed):
        for a, split in instance_stream(8, seed=950 + seed):
            q = build_special_projection(a, split)
            rotated = split.rotate(a.entries)
            n1 = split.n1
            c_hat = np.zeros_like(rotated)
            c_hat[:n1, :n1] = short_pseudo(a, split).h1_block
            c_hat[n1:, n1:] = rotated[n1:, n1:]
            p1q = q.q_full.copy()
            p1q[:n1, :n1] += np.eye(n1)
            assert max_abs(p1q.T @ c_hat @ p1q - rotated) <= 1e-8 * (1.0 + a.norm)


class TestCompatibilityReport:
    def test_block_diagonal(self, rng):
        a11 = random_psd(2, 2, rng)
        op = validate_psd(np.block([
            [a11, np.zeros((2, 2))],
            [np.zeros((2, 2)), np.eye(2)],
        ]))
        report = compatibility_report(op, SubspaceSplit(dim=4, n1=2))
        assert report.compatible
        assert report.q_hat_norm == pytest.approx(0.0, abs=1e-14)

    def test_canonical_2x2(self):
        report = compatibility_report(A2, SPLIT2)
        assert report.compatible
        assert report.q_hat_norm == pytest.approx(1.0)
        assert report.a22_rank == 1

    def test_divergent_family_growth(self):
        from shortops import make_coupled_family, truncate

        model = make_coupled_family(0.8, 1.2)
        norms = []
        for n in (4, 8, 16):
            op, split = truncate(model, n)
            report = compatibility_report(op, split)
            assert report.compatible
            norms.append(report.q_hat_norm)
        assert norms[0] < norms[1] < norms[2]
