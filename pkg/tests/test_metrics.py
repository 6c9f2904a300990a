import numpy as np
import pytest

from bellwether.errors import DataValidationError
from bellwether.metrics import (
    ConfusionMatrix,
    accuracy,
    confusion,
    g_score,
    mar,
    mean_pairwise_diff,
    pd_pf,
    precision,
    sa,
)

P, N = 1.0, 0.0


class TestConfusion:
    def test_hand_count(self):
        cm = confusion([P, P, N, N], [P, N, P, N])
        assert (cm.tp, cm.fp, cm.fn, cm.tn) == (1, 1, 1, 1)

    def test_perfect(self):
        cm = confusion([P, P, N], [P, P, N])
        assert (cm.tp, cm.tn, cm.fp, cm.fn) == (2, 1, 0, 0)

    def test_all_negative_predictions(self):
        cm = confusion([N, N], [P, P])
        assert (cm.fn, cm.tp, cm.fp, cm.tn) == (2, 0, 0, 0)

    def test_counts_sum_to_length(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            n = rng.integers(1, 50)
            cm = confusion(rng.integers(0, 2, n), rng.integers(0, 2, n))
            assert cm.total == n

    def test_length_mismatch(self):
        with pytest.raises(DataValidationError):
            confusion([P], [P, N])

    def test_empty(self):
        with pytest.raises(DataValidationError):
            confusion([], [])

    def test_negative_counts_rejected(self):
        with pytest.raises(DataValidationError):
            ConfusionMatrix(tp=-1, fp=0, tn=1, fn=0)


class TestPdPf:
    def test_values(self):
        pd, pf = pd_pf(ConfusionMatrix(tp=7, fn=3, fp=3, tn=7))
        assert pd == pytest.approx(0.7)
        assert pf == pytest.approx(0.3)

    def test_no_positives_in_truth(self):
        pd, _ = pd_pf(ConfusionMatrix(tp=0, fn=0, fp=1, tn=1))
        assert pd == 0.0

    def test_no_false_alarms(self):
        _, pf = pd_pf(ConfusionMatrix(tp=1, fn=0, fp=0, tn=5))
        assert pf == 0.0


class TestGScore:
    def test_perfect(self):
        assert g_score(1.0, 0.0) == 1.0

    @pytest.mark.parametrize("pf", [0.0, 0.3, 1.0])
    def test_zero_pd(self, pf):
        assert g_score(0.0, pf) == 0.0

    def test_hand_value(self):
        assert g_score(0.7, 0.3) == pytest.approx(0.98 / 1.4)

    def test_out_of_range(self):
        with pytest.raises(DataValidationError):
            g_score(1.2, 0.0)

    def test_monotone_on_grid(self):
        grid = np.linspace(0, 1, 21)
        for pf in grid:
            gs = [g_score(pd, pf) for pd in grid]
            assert all(b >= a - 1e-12 for a, b in zip(gs, gs[1:]))
        for pd in grid:
            gs = [g_score(pd, pf) for pf in grid]
            assert all(b <= a + 1e-12 for a, b in zip(gs, gs[1:]))

    def test_harmonic_mean_identity(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            pd = rng.uniform(0.01, 1.0)
            pf = rng.uniform(0.0, 0.99)
            harmonic = 2.0 / (1.0 / pd + 1.0 / (1.0 - pf))
            assert g_score(pd, pf) == pytest.approx(harmonic, abs=1e-12)


def test_accuracy_and_precision():
    cm = ConfusionMatrix(tp=3, fp=1, tn=4, fn=2)
    assert accuracy(cm) == pytest.approx(0.7)
    assert precision(cm) == pytest.approx(0.75)
    assert precision(ConfusionMatrix(tp=0, fp=0, tn=1, fn=1)) == 0.0


class TestMar:
    def test_zero_on_equal(self):
        assert mar([1, 3], [1, 3]) == 0.0

    def test_hand_value(self):
        assert mar([1, 3], [2, 2]) == 1.0

    def test_single_point(self):
        assert mar([5], [2]) == 3.0

    def test_empty(self):
        with pytest.raises(DataValidationError):
            mar([], [])

    def test_nonnegative_and_zero_iff_equal(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            truth = rng.normal(size=10)
            preds = truth + rng.normal(scale=0.1, size=10)
            m = mar(truth, preds)
            assert m >= 0.0
            assert (m == 0.0) == bool(np.array_equal(truth, preds))


class TestSa:
    def test_perfect_is_100(self):
        truth = [1.0, 4.0, 9.0]
        assert sa(truth, truth) == pytest.approx(100.0)

    def test_hand_value(self):
        # MAR = 1, baseline = (2/4)*2 = 1
        assert sa([1, 3], [2, 2]) == pytest.approx(0.0)

    def test_single_point_rejected(self):
        with pytest.raises(DataValidationError):
            sa([1.0], [1.0])

    def test_constant_truth_rejected(self):
        with pytest.raises(DataValidationError, match="baseline"):
            sa([2.0, 2.0, 2.0], [1.0, 2.0, 3.0])

    def test_matches_quadratic_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            n = rng.integers(2, 40)
            truth = rng.normal(size=n) * 10
            if np.ptp(truth) == 0:
                continue
            preds = truth + rng.normal(size=n)
            total = 0.0
            for i in range(n):
                for j in range(i):
                    total += abs(truth[i] - truth[j])
            baseline = 2.0 * total / (n * n)
            expected = (1.0 - np.mean(np.abs(preds - truth)) / baseline) * 100.0
            assert sa(truth, preds) == pytest.approx(expected, abs=1e-9)
            assert mean_pairwise_diff(truth) == pytest.approx(baseline, abs=1e-9)

    def test_random_guess_scores_near_zero(self):
        # constant predictor guessing one training value should hover near SA 0
        rng = np.random.default_rng(4)
        truth = rng.normal(size=1000) * 5 + 20
        guesses = [sa(truth, np.full(1000, rng.choice(truth))) for _ in range(30)]
        assert abs(float(np.mean(guesses))) < 10.0
