import numpy as np
import pytest
from numpy.testing import assert_allclose

from shortops import (
    NotPSD,
    OperatorModel,
    ParameterOutOfRange,
    SubspaceSplit,
    ValidationError,
    convergence_study,
    decreasing_approximation_study,
    make_coupled_family,
    make_diagonal_geometric,
    make_schedule,
    non_monotone_truncation_witness,
    short,
    truncate,
    validate_psd,
)
from shortops.instances import instance_stream


class TestTruncate:
    def test_diagonal_model(self):
        model = make_diagonal_geometric(0.5, n1=1)
        op, split = truncate(model, 2)
        assert_allclose(op.entries, np.diag([1.0, 0.5, 0.25]))
        assert (split.dim, split.n1) == (3, 1)

    def test_nested_consistency(self):
        model = make_coupled_family(2.0, 1.5)
        big, _ = truncate(model, 8)
        small, _ = truncate(model, 3)
        assert np.array_equal(big.entries[:4, :4], small.entries)

    def test_coupled_family_is_psd(self):
        model = make_coupled_family(2.0, 1.5)
        op, split = truncate(model, 4)
        assert op.dim == 5
        assert np.linalg.eigvalsh(op.entries)[0] >= 0

    def test_not_psd_rejected(self):
        model = OperatorModel(n1=1, entry=lambda i, j: -1.0 if i == j == 0 else (1.0 if i == j else 0.0),
                              trace_class=False)
        with pytest.raises(NotPSD):
            truncate(model, 2)

    def test_asymmetric_entry_rejected(self):
        model = OperatorModel(n1=1, entry=lambda i, j: float(i - j) + (i == j), trace_class=False)
        with pytest.raises(ValidationError):
            truncate(model, 3)

    def test_bad_size(self):
        with pytest.raises(ParameterOutOfRange):
            truncate(make_diagonal_geometric(0.5), 0)

    def test_grid_matches_scalar_entry(self):
        model = make_coupled_family(1.1, 1.3)
        op, _ = truncate(model, 6)
        size = model.n1 + 6
        manual = np.array([[model.entry(i, j) for j in range(size)] for i in range(size)])
        assert_allclose(op.entries, manual)


class TestCoupledFamily:
    def test_parameter_validation(self):
        with pytest.raises(ParameterOutOfRange):
            make_coupled_family(0.4, 1.5)
        with pytest.raises(ParameterOutOfRange):
            make_coupled_family(2.0, 0.9)

    def test_coupling_symmetry(self):
        model = make_coupled_family(1.5, 1.2)
        for k in (1, 3, 10):
            assert model.entry(0, k) == model.entry(k, 0)

    def test_tame_regime_growth_under_two(self):
        # 2*alpha - beta = 2.5: the projection norms grow like sqrt(log n)
        model = make_coupled_family(2.0, 1.5)
        from shortops import build_special_projection

        norms = []
        for n in (4, 256):
            op, split = truncate(model, n)
            norms.append(build_special_projection(op, split).certificates.q_hat_norm)
        assert norms[1] / norms[0] < 2.0

    def test_divergent_regime_growth_over_two(self):
        model = make_coupled_family(0.8, 1.2)
        from shortops import build_special_projection

        norms = []
        for n in (4, 8, 16, 32, 64, 128, 256):
            op, split = truncate(model, n)
            norms.append(build_special_projection(op, split).certificates.q_hat_norm)
        assert all(b > a for a, b in zip(norms, norms[1:]))
        assert norms[-1] / norms[0] > 2.0


class TestSchedule:
    def test_validation(self):
        with pytest.raises(ParameterOutOfRange):
            make_schedule([4, 8], n1=1)
        with pytest.raises(ParameterOutOfRange):
            make_schedule([4, 4, 8], n1=1)
        with pytest.raises(ParameterOutOfRange):
            make_schedule([0, 4, 8], n1=1)

    def test_zero_probe_rejected(self):
        from shortops import TruncationSchedule

        with pytest.raises(ParameterOutOfRange):
            TruncationSchedule(sizes=(2, 4, 8), probe_vectors=((np.zeros(2), np.ones(2)),))

    def test_default_probes(self):
        sched = make_schedule([4, 8, 16], n1=2)
        assert len(sched.probe_vectors) == 4  # two basis + two random
        c0, d0 = sched.probe_vectors[0]
        assert_allclose(c0, [1.0, 0.0])
        assert_allclose(d0, [1.0, 0.0])


class TestConvergenceStudy:
    def test_block_diagonal_is_constant(self):
        model = make_diagonal_geometric(0.5, n1=1)
        report = convergence_study(model, make_schedule([2, 4, 8], n1=1))
        assert report.verdict == "trace_converging"
        for rec in report.records:
            assert rec.trace_norm_dist_to_ref == 0.0
            assert rec.weak_probe_values[0] == pytest.approx(1.0)

    def test_tame_family_trace_converging(self):
        model = make_coupled_family(2.0, 1.5)
        sched = make_schedule([4, 8, 16, 32, 64], n1=1)
        report = convergence_study(model, sched, reference_n=128)
        assert report.verdict == "trace_converging"
        dists = [rec.trace_norm_dist_to_ref for rec in report.records]
        assert all(b < a for a, b in zip(dists, dists[1:]))

    def test_divergent_family_flagged(self):
        model = make_coupled_family(0.8, 1.2)
        report = convergence_study(model, make_schedule([4, 8, 16, 32, 64], n1=1))
        assert report.verdict == "q_hat_diverging"

    def test_compatibility_succeeds_at_every_size(self):
        model = make_coupled_family(0.8, 1.2)
        report = convergence_study(model, make_schedule([4, 8, 16], n1=1))
        for rec in report.records:
            assert np.isfinite(rec.a22_effective_cond)

    def test_reference_must_cover_schedule(self):
        model = make_diagonal_geometric(0.5)
        with pytest.raises(ParameterOutOfRange):
            convergence_study(model, make_schedule([2, 4, 8], n1=1), reference_n=6)

    def test_desk_scale_cap(self):
        model = make_diagonal_geometric(0.5)
        with pytest.raises(ParameterOutOfRange):
            convergence_study(model, make_schedule([2, 4, 8192], n1=1))

    def test_false_trace_class_claim_rejected(self):
        model = OperatorModel(n1=1, entry=lambda i, j: 1.0 if i == j else 0.0, trace_class=True)
        with pytest.raises(ValidationError):
            convergence_study(model, make_schedule([2, 4, 8, 16], n1=1))

    def test_schedule_extension_stability(self):
        model = make_coupled_family(2.0, 1.5)
        base = convergence_study(model, make_schedule([4, 8, 16], n1=1), reference_n=64)
        extended = convergence_study(model, make_schedule([4, 8, 16, 32], n1=1), reference_n=64)
        for rec_a, rec_b in zip(base.records, extended.records):
            assert rec_a.n == rec_b.n
            assert rec_a.weak_probe_values == rec_b.weak_probe_values
            assert rec_a.q_hat_norm == rec_b.q_hat_norm
            assert rec_a.op_norm_dist_to_ref == rec_b.op_norm_dist_to_ref

    def test_probe_values_ignore_trailing_support(self):
        # shorts are supported on the leading block, so probe padding is exact
        model = make_coupled_family(2.0, 1.5)
        probes = [(np.array([1.0, 0.3, -0.2]), np.array([1.0, -0.5, 0.1]))]
        sched = make_schedule([4, 8, 16], n1=1, probes=probes)
        report = convergence_study(model, sched)
        op, split = truncate(model, 4)
        expected = short(op, split).h1_block[0, 0]
        assert report.records[0].weak_probe_values[0] == pytest.approx(expected)


class TestDecreasingApproximation:
    def test_closed_form_2x2(self):
        # S(A + eps I) block is eps + 2 - 1/(1 + eps)
        a = validate_psd([[2.0, 1.0], [1.0, 1.0]])
        report = decreasing_approximation_study(a, SubspaceSplit(dim=2, n1=1), [1.0, 0.1, 0.01])
        values = [rec.weak_probe_values[0] for rec in report.records]
        expected = [eps + 2.0 - 1.0 / (1.0 + eps) for eps in (1.0, 0.1, 0.01)]
        assert_allclose(values, expected, rtol=1e-12)
        assert values[0] > values[1] > values[2] > 1.0

    def test_identity_scales_leading_projection(self):
        a = validate_psd(np.eye(3))
        report = decreasing_approximation_study(a, SubspaceSplit(dim=3, n1=2), [0.5, 0.25, 0.125])
        for rec in report.records:
            assert rec.weak_probe_values[0] == pytest.approx(1.0 + rec.epsilon)
            assert rec.weak_probe_values[1] == pytest.approx(1.0 + rec.epsilon)

    def test_random_instances_monotone_and_convergent(self):
        eps = [1e-2, 1e-4, 1e-6, 1e-8, 1e-10]
        for a, split in instance_stream(10, seed=1010):
            report = decreasing_approximation_study(a, split, eps)
            assert report.records[-1].op_norm_dist_to_ref < 10 * eps[-1] * a.dim

    def test_schedule_validation(self):
        a = validate_psd(np.eye(2))
        with pytest.raises(ParameterOutOfRange):
            decreasing_approximation_study(a, SubspaceSplit(dim=2, n1=1), [0.1])
        with pytest.raises(ParameterOutOfRange):
            decreasing_approximation_study(a, SubspaceSplit(dim=2, n1=1), [0.1, 0.2])


class TestNonMonotoneWitness:
    def test_witness_persists(self):
        model, n_small, n_big = non_monotone_truncation_witness()
        first = self._gap(model, n_small, n_big)
        second = self._gap(model, n_small, n_big)
        assert first == second  # determinism across runs
        assert first < -1e-6

    @staticmethod
    def _gap(model, n_small, n_big):
        op_a, split_a = truncate(model, n_small)
        op_b, split_b = truncate(model, n_big)
        short_a = short(op_a, split_a)
        short_b = short(op_b, split_b)
        # compare on the common window: both shorts live on the leading block
        diff = short_b.h1_block - short_a.h1_block
        return float(np.linalg.eigvalsh(diff)[0])

    def test_truncations_themselves_not_monotone(self):
        # growing the truncation adds coupling with no leading diagonal
        # mass behind it, so the increment is indefinite
        model, n_small, n_big = non_monotone_truncation_witness()
        op_a, _ = truncate(model, n_small)
        op_b, _ = truncate(model, n_big)
        padded = np.zeros((op_b.dim, op_b.dim))
        padded[: op_a.dim, : op_a.dim] = op_a.entries
        assert np.linalg.eigvalsh(op_b.entries - padded)[0] < -1e-6
