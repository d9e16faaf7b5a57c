import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import mannwhitneyu

from rankopt.errors import DomainError, UndefinedMetricError
from rankopt.metrics import MetricReport, TieMode, auc_bruteforce, auc_fast, gauc

STRICT, HALF = TieMode.Strict, TieMode.HalfCredit


def random_instance(rng, n, n_levels=None):
    labels = rng.integers(0, 2, size=n)
    labels[0], labels[1] = 1, 0
    if n_levels:
        scores = rng.integers(0, n_levels, size=n) / max(n_levels - 1, 1)
    else:
        scores = rng.random(n)
    return scores, labels


@pytest.mark.parametrize("fn", [auc_bruteforce, auc_fast])
class TestExamples:
    def test_single_correct_pair(self, fn):
        assert fn([0.9, 0.1], [1, 0], STRICT) == 1.0

    def test_single_tied_pair(self, fn):
        assert fn([0.5, 0.5], [1, 0], STRICT) == 0.0
        assert fn([0.5, 0.5], [1, 0], HALF) == 0.5

    def test_hand_enumerated(self, fn):
        # pairs (0.8,0.7) (0.8,0.2) (0.6,0.2) correct, (0.6,0.7) wrong
        assert fn([0.8, 0.6, 0.7, 0.2], [1, 1, 0, 0], STRICT) == 0.75

    def test_missing_class(self, fn):
        with pytest.raises(UndefinedMetricError):
            fn([0.1, 0.2], [1, 1])
        with pytest.raises(UndefinedMetricError):
            fn([0.1, 0.2], [0, 0])

    def test_bad_inputs(self, fn):
        with pytest.raises(DomainError):
            fn([0.1, np.nan], [1, 0])
        with pytest.raises(DomainError):
            fn([0.1, 1.5], [1, 0])
        with pytest.raises(DomainError):
            fn([0.1, 0.2], [1, 2])
        with pytest.raises(DomainError):
            fn([0.1, 0.2, 0.3], [1, 0])


def test_default_tie_mode_is_strict():
    assert auc_fast([0.5, 0.5], [1, 0]) == 0.0


def test_perfect_ranking_is_one(rng):
    scores = np.sort(rng.random(300))
    labels = np.r_[np.zeros(150, int), np.ones(150, int)]
    assert auc_fast(scores, labels, STRICT) == 1.0


@pytest.mark.parametrize("ties", [STRICT, HALF])
def test_fast_matches_bruteforce_small(rng, ties):
    for _ in range(100):
        n = int(rng.integers(2, 200))
        scores, labels = random_instance(rng, n, n_levels=int(rng.integers(2, 12)))
        assert abs(auc_fast(scores, labels, ties) - auc_bruteforce(scores, labels, ties)) <= 1e-12


def test_half_credit_matches_mann_whitney(rng):
    for _ in range(50):
        scores, labels = random_instance(rng, 150, n_levels=7)
        u = mannwhitneyu(scores[labels == 1], scores[labels == 0]).statistic
        m, n = (labels == 1).sum(), (labels == 0).sum()
        assert auc_fast(scores, labels, HALF) == pytest.approx(u / (m * n), abs=1e-12)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 300))
def test_invariant_under_monotone_transform(seed, n):
    rng = np.random.default_rng(seed)
    scores, labels = random_instance(rng, n, n_levels=20)
    affine = 0.5 * scores + 0.25
    cubic = (scores ** 3 + scores) / 2.0
    for ties in (STRICT, HALF):
        a = auc_fast(scores, labels, ties)
        assert auc_fast(affine, labels, ties) == a
        assert auc_fast(cubic, labels, ties) == a


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(2, 300))
def test_label_swap_complements_on_tie_free_data(seed, n):
    rng = np.random.default_rng(seed)
    scores, labels = random_instance(rng, n)
    if np.unique(scores).size < n:
        return
    a = auc_fast(scores, labels, STRICT)
    assert auc_fast(scores, 1 - labels, STRICT) == pytest.approx(1.0 - a, abs=1e-12)


class TestGauc:
    def test_two_users_mean(self):
        scores = [0.9, 0.1, 0.5, 0.5]
        labels = [1, 0, 1, 0]
        users = [7, 7, 3, 3]
        rep = gauc(scores, labels, users, HALF)
        assert rep.gauc == 0.75
        assert rep.per_group == {3: (0.5, 1, 1), 7: (1.0, 1, 1)}
        assert rep.skipped_groups == 0

    def test_single_user_equals_auc(self, rng):
        scores, labels = random_instance(rng, 200, n_levels=15)
        for ties in (STRICT, HALF):
            rep = gauc(scores, labels, np.full(200, 42), ties)
            assert rep.gauc == rep.auc == auc_fast(scores, labels, ties)

    def test_single_class_users_skipped(self):
        scores = [0.9, 0.1, 0.3, 0.4, 0.2]
        labels = [1, 0, 1, 1, 0]
        users = [1, 1, 2, 2, 3]
        rep = gauc(scores, labels, users, STRICT)
        assert rep.per_group == {1: (1.0, 1, 1)}
        assert rep.skipped_groups == 2
        assert rep.gauc == 1.0
        assert rep.n_groups + rep.skipped_groups == 3

    def test_no_evaluable_group(self):
        with pytest.raises(UndefinedMetricError):
            gauc([0.2, 0.7], [1, 0], [1, 2])

    def test_length_mismatch(self):
        with pytest.raises(DomainError):
            gauc([0.2, 0.7], [1, 0], [1])

    @settings(max_examples=40, deadline=None)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_mean_of_groups_and_bounds(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(10, 400))
        scores, labels = random_instance(rng, n, n_levels=10)
        users = rng.integers(0, 12, size=n)
        rep = gauc(scores, labels, users, HALF)
        per = [rep.per_group[u][0] for u in sorted(rep.per_group)]
        assert rep.gauc == pytest.approx(np.mean(per), abs=1e-15)
        assert rep.n_groups + rep.skipped_groups == np.unique(users).size
        assert 0.0 <= rep.gauc <= 1.0 and 0.0 <= rep.auc <= 1.0
        for u, (a, p, q) in rep.per_group.items():
            mask = users == u
            assert a == auc_bruteforce(scores[mask], labels[mask], HALF)
            assert (p, q) == (int(labels[mask].sum()), int((1 - labels[mask]).sum()))

    def test_order_independent(self, rng):
        scores, labels = random_instance(rng, 300, n_levels=9)
        users = rng.integers(0, 20, size=300)
        perm = rng.permutation(300)
        a = gauc(scores, labels, users, HALF)
        b = gauc(scores[perm], labels[perm], users[perm], HALF)
        assert a.gauc == b.gauc and a.per_group == b.per_group


def test_report_csv(tmp_path):
    rep = MetricReport(auc=0.5, gauc=0.75, per_group={2: (0.5, 1, 1), 1: (1.0, 2, 1)}, skipped_groups=3)
    rep.write_csv(tmp_path / "m.csv", tmp_path / "g.csv")
    assert (tmp_path / "m.csv").read_text().splitlines() == ["auc,gauc,n_groups,n_skipped", "0.5,0.75,2,3"]
    assert (tmp_path / "g.csv").read_text().splitlines() == ["user_id,auc,n_pos,n_neg", "1,1.0,2,1", "2,0.5,1,1"]
