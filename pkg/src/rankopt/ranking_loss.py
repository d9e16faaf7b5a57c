"""Differentiable ranking objectives returning a value and d(loss)/d(score).

Scores are probabilities in [0, 1], so every score difference lies in
[-1, 1] where all four surrogates are non-increasing. That monotonicity is
what lets the max over all positive/negative pairs collapse to a single
pair: the lowest-scored positive against the highest-scored negative.
"""
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DomainError, EmptyClassError
from .surrogate import SurrogateKind, surrogate_grad, surrogate_value

CE_EPS = 1e-7
REDUCTIONS = ("sum", "mean", "batch")


@dataclass
class LossGrad:
    value: float
    grad: np.ndarray
    contributing: int = 0  # sub-batches (or batches) that produced a ranking term


@dataclass(frozen=True)
class PairSelection:
    pos_index: int
    neg_index: int
    margin: float


def _scores(scores):
    return np.ascontiguousarray(scores, dtype=np.float64)


def _labels(labels):
    labels = np.asarray(labels)
    if labels.dtype != np.int8:
        if np.any((labels != 0) & (labels != 1)):
            raise DomainError("labels must be 0 or 1")
        labels = labels.astype(np.int8)
    return np.ascontiguousarray(labels)


def _check_range(scores):
    if not np.all(np.isfinite(scores)) or np.any(scores < 0.0) or np.any(scores > 1.0):
        raise DomainError("scores must be finite and lie in [0, 1]")


def pairwise_loss_full(scores, labels, kind):
    """Mean surrogate over all m*n positive/negative pairs."""
    kind = SurrogateKind.parse(kind)
    s = _scores(scores)
    y = _labels(labels)
    if s.shape != y.shape:
        raise DomainError("scores and labels differ in length")
    _check_range(s)
    pos_idx = np.flatnonzero(y == 1)
    neg_idx = np.flatnonzero(y == 0)
    if pos_idx.size == 0 or neg_idx.size == 0:
        raise EmptyClassError("pairwise loss needs at least one positive and one negative")
    norm = 1.0 / (pos_idx.size * neg_idx.size)
    total, gpos, gneg = kernels.pair_sums(s[pos_idx], s[neg_idx], kind.code)
    grad = np.zeros_like(s)
    grad[pos_idx] = gpos * norm
    grad[neg_idx] = -gneg * norm
    return LossGrad(total * norm, grad, 1)


def daom_select(scores, labels):
    """Lowest-scored positive and highest-scored negative, in one linear scan.

    Ties go to the lowest index.
    """
    s = _scores(scores)
    y = _labels(labels)
    ip, ineg = kernels.select_pair(s, y)
    return PairSelection(ip, ineg, float(s[ip] - s[ineg]))


def daom_loss(scores, labels, kind):
    kind = SurrogateKind.parse(kind)
    s = _scores(scores)
    sel = daom_select(s, labels)
    grad = np.zeros_like(s)
    d = surrogate_grad(kind, sel.margin)
    grad[sel.pos_index] = d
    grad[sel.neg_index] = -d
    return LossGrad(surrogate_value(kind, sel.margin), grad, 1)


def group_bounds(user_ids):
    """Offsets of maximal contiguous runs of equal user ID (length n_runs + 1)."""
    u = np.asarray(user_ids)
    if u.size == 0:
        return np.zeros(1, dtype=np.int64)
    starts = np.flatnonzero(u[1:] != u[:-1]) + 1
    return np.concatenate(([0], starts, [u.size])).astype(np.int64)


def pdaom_loss(scores, labels, user_ids, kind, reduction="sum", bounds=None):
    """DAOM applied to every user run in the batch.

    ``reduction`` picks how run terms combine: ``"sum"`` adds them, ``"mean"``
    averages over contributing runs, ``"batch"`` divides the sum by the batch
    size (the scale of a per-sample-summed cross entropy divided by N).
    Runs lacking a class contribute nothing; if no run has both classes the
    value is 0 with a zero gradient and ``contributing == 0``. ``bounds`` may
    be passed to reuse precomputed run offsets.
    """
    kind = SurrogateKind.parse(kind)
    if reduction not in REDUCTIONS:
        raise DomainError(f"pdaom reduction must be one of {REDUCTIONS}, got {reduction!r}")
    s = _scores(scores)
    y = _labels(labels)
    if bounds is None:
        if np.shape(user_ids) != s.shape:
            raise DomainError("user_ids must match scores in length")
        bounds = group_bounds(user_ids)
    pos, neg = kernels.segment_pairs(s, y, np.ascontiguousarray(bounds, dtype=np.int64))
    ok = (pos >= 0) & (neg >= 0)
    grad = np.zeros_like(s)
    count = int(ok.sum())
    if count == 0:
        return LossGrad(0.0, grad, 0)
    pos, neg = pos[ok], neg[ok]
    margins = s[pos] - s[neg]
    values = surrogate_value(kind, margins)
    d = surrogate_grad(kind, margins)
    scale = {"sum": 1.0, "mean": 1.0 / count, "batch": 1.0 / s.size}[reduction]
    # runs are disjoint, so every index appears at most once
    grad[pos] = d * scale
    grad[neg] = -d * scale
    return LossGrad(float(np.sum(values)) * scale, grad, count)


def cross_entropy(scores, labels):
    """Batch-mean binary cross entropy on scores clamped to [eps, 1 - eps]."""
    f = np.clip(np.asarray(scores, dtype=np.float64), CE_EPS, 1.0 - CE_EPS)
    y = np.asarray(labels, dtype=np.float64)
    if f.shape != y.shape:
        raise DomainError("scores and labels differ in length")
    n = f.size
    value = -np.sum(y * np.log(f) + (1.0 - y) * np.log1p(-f)) / n
    grad = (-y / f + (1.0 - y) / (1.0 - f)) / n
    return LossGrad(float(value), grad, 0)


def combined_objective(scores, labels, user_ids, kind, lam, reduction="sum", bounds=None):
    """Cross entropy plus ``lam`` times the per-user DAOM term."""
    if lam < 0:
        raise DomainError("lambda must be non-negative")
    ce = cross_entropy(scores, labels)
    if lam == 0:
        return ce
    rank = pdaom_loss(scores, labels, user_ids, kind, reduction=reduction, bounds=bounds)
    return LossGrad(ce.value + lam * rank.value, ce.grad + lam * rank.grad, rank.contributing)
