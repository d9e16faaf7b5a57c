import numpy as np
import pytest

from rankopt.datagen import (
    GenConfig, calibrate_intercept, generate, popularity_slope, split_by_user, top_share, truth_path, write_log,
)
from rankopt.errors import ConfigError
from rankopt.metrics import TieMode, auc_fast, gauc
from rankopt.trainer import RunConfig, train
from rankopt.model import forward


def test_steep_power_law_concentrates_exposure():
    cfg = GenConfig(n_users=500, n_impressions=50_000, popularity_exponent=3.0, seed=1)
    log = generate(cfg)
    assert top_share(log.item_ids, cfg.n_items) > 0.30


@pytest.mark.parametrize("exponent", [1.0, 1.5, 2.0])
def test_item_counts_follow_power_law(exponent):
    cfg = GenConfig(popularity_exponent=exponent, seed=2)
    log = generate(cfg)
    assert abs(popularity_slope(log.item_ids, cfg.n_items) + exponent) <= 0.15


@pytest.mark.parametrize("target", [0.05, 0.1, 0.3])
def test_positive_rate_calibrated(target):
    log = generate(GenConfig(n_users=500, n_impressions=50_000, target_ctr=target, seed=3))
    assert abs(log.dataset.labels.mean() - target) <= 0.2 * target


def test_intercept_calibration_exact():
    base = np.random.default_rng(0).standard_normal(1000)
    c = calibrate_intercept(base, 0.2)
    assert np.mean(1 / (1 + np.exp(-(base + c)))) == pytest.approx(0.2, abs=1e-9)


def test_no_personal_signal_means_chance_gauc():
    # only the per-user bias is left, so every user's impressions tie
    cfg = GenConfig(user_affinity_scale=0.0, popularity_scale=0.0, noise_scale=0.0, seed=4)
    log = generate(cfg)
    rep = gauc(log.truth, log.dataset.labels, log.dataset.user_ids, TieMode.HalfCredit)
    assert abs(rep.gauc - 0.5) < 0.02
    assert rep.auc > 0.55


def test_affinity_adds_within_user_signal():
    a = generate(GenConfig(user_affinity_scale=0.0, seed=5))
    b = generate(GenConfig(user_affinity_scale=2.0, seed=5))
    ga = gauc(a.truth, a.dataset.labels, a.dataset.user_ids, "half").gauc
    gb = gauc(b.truth, b.dataset.labels, b.dataset.user_ids, "half").gauc
    assert gb > ga + 0.05


def test_same_seed_same_bytes(tmp_path):
    cfg = GenConfig(n_users=100, n_impressions=3000, seed=6)
    write_log(tmp_path / "a.csv", generate(cfg))
    write_log(tmp_path / "b.csv", generate(cfg))
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert (tmp_path / "a.truth").read_bytes() == (tmp_path / "b.truth").read_bytes()
    write_log(tmp_path / "c.csv", generate(GenConfig(n_users=100, n_impressions=3000, seed=7)))
    assert (tmp_path / "c.csv").read_bytes() != (tmp_path / "a.csv").read_bytes()


def test_every_user_present_and_active_users_vary():
    cfg = GenConfig(n_users=300, n_impressions=30_000, seed=8)
    counts = np.bincount(generate(cfg).dataset.user_ids, minlength=cfg.n_users)
    assert counts.min() >= 1 and counts.sum() == cfg.n_impressions
    assert counts.max() > 5 * np.median(counts) or counts.max() > 3 * counts.min()


def test_feature_layout():
    cfg = GenConfig(n_users=50, n_impressions=500, latent_dim=3, seed=9)
    ds = generate(cfg).dataset
    assert ds.dim == cfg.feature_dim == 8


def test_split_by_user():
    log = generate(GenConfig(n_users=400, n_impressions=20_000, seed=10))
    parts = split_by_user(log, seed=10)
    users = [set(np.unique(p.dataset.user_ids).tolist()) for p in parts]
    assert [len(u) for u in users] == [320, 40, 40]
    assert not (users[0] & users[1]) and not (users[0] & users[2]) and not (users[1] & users[2])
    assert sum(len(p.dataset) for p in parts) == 20_000


@pytest.mark.parametrize("bad", [
    dict(n_users=10, n_impressions=5), dict(latent_dim=0), dict(popularity_exponent=0.0),
    dict(target_ctr=1.0), dict(noise_scale=-1.0),
])
def test_config_validation(bad):
    with pytest.raises(ConfigError):
        GenConfig(**bad)


def test_truth_path():
    assert truth_path("x/train.csv") == "x/train.truth"
    assert truth_path("data") == "data.truth"


def test_bayes_scorer_bounds_trained_model():
    log = generate(GenConfig(n_users=1500, n_impressions=120_000, seed=11))
    ds = log.dataset
    result = train(RunConfig(objective="ce", epochs=4), ds)
    model_auc = auc_fast(forward(result.params, ds.features), ds.labels, "half")
    bayes_auc = auc_fast(log.truth, ds.labels, "half")
    assert model_auc <= bayes_auc + 0.01
