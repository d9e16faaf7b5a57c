"""Pure numpy fallback for the compiled kernels in ``_kernels.pyx``.

Same signatures and semantics; used when the extension is not built or when
``RANKOPT_PURE_PYTHON=1`` is set.
"""
import numpy as np

from .errors import DomainError, EmptyClassError
from .surrogate import SurrogateKind, surrogate_grad, surrogate_value

_KINDS = {kind.code: kind for kind in SurrogateKind}


def _check(scores, labels):
    if scores.shape[0] != labels.shape[0]:
        raise DomainError("scores and labels differ in length")
    if not np.all(np.isfinite(scores)) or np.any(scores < 0.0) or np.any(scores > 1.0):
        raise DomainError("scores must be finite and lie in [0, 1]")
    if np.any((labels != 0) & (labels != 1)):
        raise DomainError("labels must be 0 or 1")


def _scan(scores, labels):
    pos_mask = labels == 1
    neg_mask = labels == 0
    ip = int(np.argmin(np.where(pos_mask, scores, np.inf))) if pos_mask.any() else -1
    ineg = int(np.argmax(np.where(neg_mask, scores, -np.inf))) if neg_mask.any() else -1
    return ip, ineg


def select_pair(scores, labels):
    _check(scores, labels)
    ip, ineg = _scan(scores, labels)
    if ip < 0 or ineg < 0:
        raise EmptyClassError("batch needs at least one positive and one negative")
    return ip, ineg


def segment_pairs(scores, labels, bounds):
    _check(scores, labels)
    nseg = len(bounds) - 1
    pos = np.empty(nseg, dtype=np.int64)
    neg = np.empty(nseg, dtype=np.int64)
    for k in range(nseg):
        lo, hi = int(bounds[k]), int(bounds[k + 1])
        ip, ineg = _scan(scores[lo:hi], labels[lo:hi])
        pos[k] = ip + lo if ip >= 0 else -1
        neg[k] = ineg + lo if ineg >= 0 else -1
    return pos, neg


def pair_sums(pos, neg, kind):
    kind = _KINDS[kind]
    diff = pos[:, None] - neg[None, :]
    g = surrogate_grad(kind, diff)
    return float(surrogate_value(kind, diff).sum()), g.sum(axis=1), g.sum(axis=0)
