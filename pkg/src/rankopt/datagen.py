"""Seeded synthetic click logs with long-tail item exposure and per-user taste.

The true click probability of an impression is

    sigmoid(intercept + user_bias + popularity_scale * pop(item)
            + affinity * <u, v> / sqrt(k) + noise)

where ``pop`` is the standardized log exposure probability of the item and
``intercept`` is calibrated so the mean click probability hits ``target_ctr``.
The user-bias term moves whole users up or down and so only helps global
AUC; the affinity term is the within-user signal that GAUC measures.
"""
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import expit

from .batching import Dataset, write_dataset, write_truth
from .errors import ConfigError


@dataclass(frozen=True)
class GenConfig:
    n_users: int = 2000
    n_items: int = 1000
    n_impressions: int = 200_000
    latent_dim: int = 8
    popularity_exponent: float = 2.0
    popularity_scale: float = 0.5
    user_bias_scale: float = 1.0
    user_affinity_scale: float = 2.0
    noise_scale: float = 0.5
    feature_noise: float = 0.3
    activity_exponent: float = 0.5
    target_ctr: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if min(self.n_users, self.n_items, self.n_impressions) < 1:
            raise ConfigError("n_users, n_items and n_impressions must be positive")
        if self.n_impressions < self.n_users:
            raise ConfigError("n_impressions must be >= n_users (every user gets an impression)")
        if self.latent_dim < 1:
            raise ConfigError("latent_dim must be >= 1")
        if self.popularity_exponent <= 0:
            raise ConfigError("popularity_exponent must be > 0")
        if self.activity_exponent < 0:
            raise ConfigError("activity_exponent must be >= 0")
        if min(self.noise_scale, self.feature_noise, self.user_bias_scale) < 0:
            raise ConfigError("noise and scale parameters must be >= 0")
        if not 0.0 < self.target_ctr < 1.0:
            raise ConfigError("target_ctr must lie in (0, 1)")

    @property
    def feature_dim(self):
        return 2 * self.latent_dim + 2


@dataclass
class SyntheticLog:
    dataset: Dataset
    truth: np.ndarray     # true click probability per impression
    item_ids: np.ndarray  # item rank index (0 = most exposed)
    intercept: float


def power_law_weights(n, exponent):
    w = np.arange(1, n + 1, dtype=np.float64) ** (-exponent)
    return w / w.sum()


def calibrate_intercept(base_logits, target):
    """Intercept c with mean(sigmoid(base + c)) == target."""
    def gap(c):
        return expit(base_logits + c).mean() - target
    lo, hi = -50.0, 50.0
    return brentq(gap, lo, hi, xtol=1e-12)


def generate(config):
    rng = np.random.default_rng(config.seed)
    k = config.latent_dim

    user_vec = rng.standard_normal((config.n_users, k))
    user_bias = config.user_bias_scale * rng.standard_normal(config.n_users)
    item_vec = rng.standard_normal((config.n_items, k))
    exposure = power_law_weights(config.n_items, config.popularity_exponent)
    log_exp = np.log(exposure)
    pop = (log_exp - log_exp.mean()) / (log_exp.std() if log_exp.std() > 0 else 1.0)

    # per-user impression counts: one each, the rest spread by a power law over
    # a random ordering of users
    activity = power_law_weights(config.n_users, config.activity_exponent)[rng.permutation(config.n_users)]
    counts = 1 + rng.multinomial(config.n_impressions - config.n_users, activity)
    users = np.repeat(np.arange(config.n_users), counts)
    items = rng.choice(config.n_items, size=config.n_impressions, p=exposure)
    noise = config.noise_scale * rng.standard_normal(config.n_impressions)

    affinity = np.einsum("ij,ij->i", user_vec[users], item_vec[items]) / np.sqrt(k)
    base = user_bias[users] + config.popularity_scale * pop[items] + config.user_affinity_scale * affinity + noise
    intercept = calibrate_intercept(base, config.target_ctr)
    truth = expit(base + intercept)
    labels = (rng.random(config.n_impressions) < truth).astype(np.int8)

    user_proxy = np.column_stack([user_vec, user_bias]) + config.feature_noise * rng.standard_normal((config.n_users, k + 1))
    item_proxy = item_vec + config.feature_noise * rng.standard_normal((config.n_items, k))
    features = np.column_stack([user_proxy[users], item_proxy[items], pop[items]])

    order = rng.permutation(config.n_impressions)
    dataset = Dataset(users[order], labels[order], features[order])
    return SyntheticLog(dataset, truth[order], items[order], float(intercept))


def split_by_user(log, fractions=(0.8, 0.1, 0.1), seed=0):
    """Partition a log into parts by user; every user lands in exactly one part."""
    fractions = np.asarray(fractions, dtype=np.float64)
    if np.any(fractions < 0) or not np.isclose(fractions.sum(), 1.0):
        raise ConfigError("split fractions must be non-negative and sum to 1")
    rng = np.random.default_rng(seed)
    uids = np.unique(log.dataset.user_ids)
    uids = uids[rng.permutation(uids.size)]
    cuts = np.floor(np.cumsum(fractions)[:-1] * uids.size + 0.5).astype(int)
    parts = []
    for group in np.split(uids, cuts):
        mask = np.isin(log.dataset.user_ids, group)
        parts.append(SyntheticLog(log.dataset.take(mask), log.truth[mask], log.item_ids[mask], log.intercept))
    return parts


def write_log(path, log):
    """Write the dataset file and its ``.truth`` sidecar (``<path>.truth``)."""
    write_dataset(path, log.dataset)
    write_truth(truth_path(path), log.truth)


def truth_path(path):
    path = str(path)
    stem = path[: -len(".csv")] if path.endswith(".csv") else path
    return stem + ".truth"


def top_share(item_ids, n_items, fraction=0.01):
    """Share of impressions going to the top ``fraction`` of items by impression count."""
    counts = np.bincount(item_ids, minlength=n_items)
    n_top = max(1, int(round(fraction * n_items)))
    return float(np.sort(counts)[::-1][:n_top].sum() / counts.sum())


def popularity_slope(item_ids, n_items, min_count=10):
    """Log-log slope of impression count against popularity rank.

    Ranks with fewer than ``min_count`` impressions are left out; their counts
    are dominated by sampling noise and zero truncation.
    """
    counts = np.bincount(item_ids, minlength=n_items).astype(np.float64)
    ranks = np.arange(1, n_items + 1, dtype=np.float64)
    keep = counts >= min_count
    if keep.sum() < 2:
        raise ConfigError("too few items with enough impressions to fit a slope")
    slope, _ = np.polyfit(np.log(ranks[keep]), np.log(counts[keep]), 1)
    return float(slope)
