"""AUC as the normalized Wilcoxon-Mann-Whitney statistic, and per-user GAUC.

Two AUC routes are provided: ``auc_bruteforce`` counts every positive/negative
pair and serves as the oracle; ``auc_fast`` uses rank sums in O(n log n).
"""
import csv
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .errors import DomainError, UndefinedMetricError


class TieMode(Enum):
    Strict = "strict"
    HalfCredit = "half"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(value)
        except ValueError:
            try:
                return cls[value]
            except KeyError:
                raise DomainError(f"unknown tie mode {value!r}; expected 'strict' or 'half'") from None


@dataclass
class MetricReport:
    auc: float
    gauc: float
    per_group: dict = field(default_factory=dict)  # user_id -> (auc, n_pos, n_neg)
    skipped_groups: int = 0

    @property
    def n_groups(self):
        return len(self.per_group)

    def row(self):
        return {"auc": self.auc, "gauc": self.gauc, "n_groups": self.n_groups, "n_skipped": self.skipped_groups}

    def write_csv(self, path, detail_path=None):
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=["auc", "gauc", "n_groups", "n_skipped"])
            writer.writeheader()
            writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in self.row().items()})
        if detail_path is not None:
            write_group_detail(detail_path, self.per_group)


def write_group_detail(path, per_group):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["user_id", "auc", "n_pos", "n_neg"])
        for uid in sorted(per_group):
            auc, n_pos, n_neg = per_group[uid]
            writer.writerow([uid, repr(auc), n_pos, n_neg])


def _validate(scores, labels):
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    if scores.ndim != 1 or scores.shape != labels.shape:
        raise DomainError("scores and labels must be 1-d arrays of equal length")
    if not np.all(np.isfinite(scores)) or np.any(scores < 0.0) or np.any(scores > 1.0):
        raise DomainError("scores must be finite and lie in [0, 1]")
    if np.any((labels != 0) & (labels != 1)):
        raise DomainError("labels must be 0 or 1")
    labels = labels.astype(bool)
    m = int(labels.sum())
    n = labels.size - m
    if m == 0 or n == 0:
        raise UndefinedMetricError("AUC needs at least one positive and one negative sample")
    return scores, labels, m, n


def auc_bruteforce(scores, labels, ties=TieMode.Strict):
    """Explicit double loop over all positive/negative pairs."""
    ties = TieMode.parse(ties)
    scores, labels, m, n = _validate(scores, labels)
    tie_credit = 0.5 if ties is TieMode.HalfCredit else 0.0
    pos = scores[labels].tolist()
    neg = scores[~labels].tolist()
    credit = 0.0
    for sp in pos:
        for sn in neg:
            if sp > sn:
                credit += 1.0
            elif sp == sn:
                credit += tie_credit
    return credit / (m * n)


def auc_fast(scores, labels, ties=TieMode.Strict):
    """Rank-sum form of the WMW statistic.

    With tie-averaged ranks, ``R - m(m+1)/2`` counts every correctly ordered
    pair once and every tied pair one half; Strict mode removes the half
    credit by counting tied pairs per distinct score.
    """
    ties = TieMode.parse(ties)
    scores, labels, m, n = _validate(scores, labels)
    order = np.argsort(scores, kind="mergesort")
    s = scores[order]
    y = labels[order]
    # tie blocks over the sorted scores
    starts = np.flatnonzero(np.r_[True, s[1:] != s[:-1]])
    sizes = np.diff(np.r_[starts, s.size])
    pos_per_block = np.add.reduceat(y.astype(np.int64), starts)
    neg_per_block = sizes - pos_per_block
    # negatives strictly below each block, summed over the positives in it
    neg_below = np.cumsum(neg_per_block) - neg_per_block
    correct = float(np.dot(pos_per_block, neg_below))
    if ties is TieMode.HalfCredit:
        correct += 0.5 * float(np.dot(pos_per_block, neg_per_block))
    return correct / (m * n)


def gauc(scores, labels, user_ids, ties=TieMode.Strict):
    """Unweighted mean of per-user AUCs over users that have both classes.

    Users with a single class are excluded and counted in ``skipped_groups``.
    The mean is accumulated in ascending user-ID order.
    """
    ties = TieMode.parse(ties)
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels)
    user_ids = np.asarray(user_ids)
    if user_ids.shape != scores.shape:
        raise DomainError("user_ids must match scores in length")
    overall = None
    if labels.size and 0 < int(np.sum(labels == 1)) < labels.size:
        overall = auc_fast(scores, labels, ties)

    order = np.argsort(user_ids, kind="stable")
    uids = user_ids[order]
    starts = np.flatnonzero(np.r_[True, uids[1:] != uids[:-1]]) if uids.size else np.array([], dtype=np.int64)
    ends = np.r_[starts[1:], uids.size]
    per_group = {}
    skipped = 0
    total = 0.0
    for lo, hi in zip(starts.tolist(), ends.tolist()):
        idx = order[lo:hi]
        y = labels[idx]
        n_pos = int(np.sum(y == 1))
        n_neg = (hi - lo) - n_pos
        if n_pos == 0 or n_neg == 0:
            skipped += 1
            continue
        a = auc_fast(scores[idx], y, ties)
        per_group[uids[lo].item()] = (a, n_pos, n_neg)
        total += a
    if not per_group:
        raise UndefinedMetricError("no user group contains both a positive and a negative sample")
    if overall is None:
        raise UndefinedMetricError("AUC needs at least one positive and one negative sample")
    return MetricReport(auc=overall, gauc=total / len(per_group), per_group=per_group, skipped_groups=skipped)
