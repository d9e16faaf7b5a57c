"""User-grouped dataset ordering, mini-batch slicing and sub-batch splitting.

Dataset file format (text, one sample per line after a header)::

    #dim=d
    user_id,label,f1,...,fd

Floats are written with ``repr`` so a write/read cycle is bit-exact.
"""
import hashlib
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, ContractViolation, DimensionError, DomainError


@dataclass
class Dataset:
    user_ids: np.ndarray  # int64, shape (n,)
    labels: np.ndarray    # int8, shape (n,)
    features: np.ndarray  # float64, shape (n, d)

    def __post_init__(self):
        self.user_ids = np.ascontiguousarray(self.user_ids, dtype=np.int64)
        labels = np.asarray(self.labels)
        if np.any((labels != 0) & (labels != 1)):
            raise DomainError("labels must be 0 or 1")
        self.labels = np.ascontiguousarray(labels, dtype=np.int8)
        self.features = np.ascontiguousarray(self.features, dtype=np.float64)
        n = self.user_ids.shape[0]
        if self.features.ndim != 2 or self.features.shape[0] != n or self.labels.shape != (n,):
            raise DimensionError("user_ids, labels and features must agree on the sample count")

    def __len__(self):
        return self.user_ids.shape[0]

    @property
    def dim(self):
        return self.features.shape[1]

    def take(self, index):
        return Dataset(self.user_ids[index], self.labels[index], self.features[index])

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            np.array_equal(self.user_ids, other.user_ids)
            and np.array_equal(self.labels, other.labels)
            and self.features.shape == other.features.shape
            and np.array_equal(self.features.view(np.uint64), other.features.view(np.uint64))
        )


@dataclass(frozen=True)
class SubBatch:
    start: int
    stop: int
    user_id: int
    pos_count: int
    neg_count: int

    @property
    def size(self):
        return self.stop - self.start

    @property
    def contributes(self):
        return self.pos_count >= 1 and self.neg_count >= 1


def write_dataset(path, dataset):
    with open(path, "w") as fh:
        fh.write(f"#dim={dataset.dim}\n")
        for uid, lab, row in zip(dataset.user_ids.tolist(), dataset.labels.tolist(), dataset.features.tolist()):
            fh.write(f"{uid},{lab}," + ",".join(map(repr, row)) + "\n")


def read_dataset(path):
    with open(path) as fh:
        header = fh.readline().strip()
        if not header.startswith("#dim="):
            raise DomainError(f"{path}: missing '#dim=d' header")
        dim = int(header[len("#dim="):])
        rows = [line.rstrip("\n").split(",") for line in fh if line.strip()]
    if not rows:
        return Dataset(np.zeros(0, np.int64), np.zeros(0, np.int8), np.zeros((0, dim)))
    if any(len(r) != dim + 2 for r in rows):
        raise DimensionError(f"{path}: expected {dim + 2} fields per line")
    user_ids = np.array([int(r[0]) for r in rows], dtype=np.int64)
    labels = np.array([int(r[1]) for r in rows], dtype=np.int8)
    features = np.array([[float(v) for v in r[2:]] for r in rows], dtype=np.float64).reshape(len(rows), dim)
    return Dataset(user_ids, labels, features)


def write_truth(path, probs):
    with open(path, "w") as fh:
        for p in np.asarray(probs, dtype=np.float64).tolist():
            fh.write(repr(p) + "\n")


def read_truth(path):
    with open(path) as fh:
        return np.array([float(line) for line in fh if line.strip()], dtype=np.float64)


def hash_user_id(value):
    """Map an external (e.g. string) user ID to a signed 64-bit integer."""
    digest = hashlib.blake2b(str(value).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little", signed=True)


def is_grouped(user_ids):
    """True when each user ID occupies a single contiguous run."""
    u = np.asarray(user_ids)
    if u.size == 0:
        return True
    runs = 1 + int(np.count_nonzero(u[1:] != u[:-1]))
    return runs == np.unique(u).size


def sort_by_user(dataset):
    order = np.argsort(dataset.user_ids, kind="stable")
    return dataset.take(order)


def shuffle_by_user(dataset, rng):
    """Random user-block order, samples shuffled within each user.

    Keeps every user's samples contiguous. ``rng`` is a numpy Generator.
    """
    ds = sort_by_user(dataset)
    u = ds.user_ids
    if u.size == 0:
        return ds
    starts = np.flatnonzero(np.r_[True, u[1:] != u[:-1]])
    ends = np.r_[starts[1:], u.size]
    pieces = []
    for k in rng.permutation(starts.size):
        lo, hi = starts[k], ends[k]
        pieces.append(lo + rng.permutation(hi - lo))
    return ds.take(np.concatenate(pieces))


def make_batches(dataset, batch_size):
    """Consecutive slices of exactly ``batch_size``; a final partial batch is dropped."""
    if int(batch_size) != batch_size or batch_size < 2:
        raise ConfigError(f"batch_size must be an integer >= 2, got {batch_size!r}")
    batch_size = int(batch_size)
    if not is_grouped(dataset.user_ids):
        raise ContractViolation("dataset must be grouped by user before batching")
    n_full = len(dataset) // batch_size
    return [dataset.take(slice(k * batch_size, (k + 1) * batch_size)) for k in range(n_full)]


def split_subbatches(batch):
    """Maximal contiguous runs of one user ID inside a user-grouped batch."""
    u = batch.user_ids
    if not is_grouped(u):
        raise ContractViolation("batch is not grouped by user id")
    if u.size == 0:
        return []
    starts = np.flatnonzero(np.r_[True, u[1:] != u[:-1]])
    ends = np.r_[starts[1:], u.size]
    pos = np.add.reduceat(batch.labels.astype(np.int64), starts)
    return [
        SubBatch(int(lo), int(hi), int(u[lo]), int(p), int(hi - lo - p))
        for lo, hi, p in zip(starts, ends, pos)
    ]
