"""Epoch loop tying batching, objectives, the scorer and the optimizer together."""
import csv
from dataclasses import dataclass, field, replace

import numpy as np

from . import options
from . import ranking_loss as rl
from .batching import make_batches, shuffle_by_user
from .errors import ConfigError, TrainingAborted
from .metrics import TieMode, auc_fast, gauc
from .model import ScorerConfig, backward, forward, init_params, make_optimizer
from .surrogate import SurrogateKind

OBJECTIVES = ("ce", "ce+pel", "ce+pll", "ce+psl", "ce+phl", "ce+daom", "ce+pdaom")

STEP_FIELDS = ["epoch", "step", "loss", "ce_loss", "rank_loss", "contributing"]
EPOCH_FIELDS = ["epoch", "train_loss", "val_auc", "val_gauc", "loss_down_auc_down"]


@dataclass
class RunConfig:
    objective: str = "ce+pdaom"
    surrogate: str = "pel"
    lam: float = 10.0
    batch_size: int = 384
    epochs: int = 8
    lr: float = 0.003
    lr_decay: float = 0.7
    optimizer: str = "adam"
    hidden_dim: int = 32
    init_scale: float = 0.1
    weight_decay: float = 0.0
    pdaom_reduction: str = "batch"
    seed: int = 0
    data_seed: int = 0
    tie_mode: str = "half"

    def __post_init__(self):
        if self.objective not in OBJECTIVES:
            raise ConfigError(f"unknown objective {self.objective!r}; expected one of {', '.join(OBJECTIVES)}")
        SurrogateKind.parse(self.surrogate)
        TieMode.parse(self.tie_mode)
        if self.lam < 0:
            raise ConfigError("lambda must be >= 0")
        if int(self.batch_size) != self.batch_size or self.batch_size < 2:
            raise ConfigError("batch_size must be an integer >= 2")
        if not 0 < self.lr_decay <= 1:
            raise ConfigError("lr_decay must lie in (0, 1]")
        if self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.pdaom_reduction not in rl.REDUCTIONS:
            raise ConfigError(f"pdaom_reduction must be one of {', '.join(rl.REDUCTIONS)}")

    @classmethod
    def from_mapping(cls, mapping):
        """Build from string values (config files, CLI ``key=value`` overrides)."""
        return options.build(cls, mapping, aliases={"lambda": "lam"}, what="run option")

    def with_(self, **changes):
        return replace(self, **changes)


@dataclass
class RunResult:
    config: RunConfig
    scorer: ScorerConfig
    params: dict
    steps: list = field(default_factory=list)
    epochs: list = field(default_factory=list)
    rank_evaluations: int = 0


def batch_objective(config, scores, batch):
    """Loss and score-gradient of the configured objective on one batch.

    Returns (LossGrad, ce_value, rank_value, ranking_term_evaluated).
    """
    ce = rl.cross_entropy(scores, batch.labels)
    obj = config.objective
    if obj == "ce" or config.lam == 0:
        return ce, ce.value, 0.0, False
    y = batch.labels
    if obj == "ce+pdaom":
        rank = rl.pdaom_loss(scores, y, batch.user_ids, config.surrogate, reduction=config.pdaom_reduction)
    else:
        has_both = 0 < int(y.sum()) < y.size
        if not has_both:
            rank = rl.LossGrad(0.0, np.zeros_like(scores), 0)
        elif obj == "ce+daom":
            rank = rl.daom_loss(scores, y, config.surrogate)
        else:
            rank = rl.pairwise_loss_full(scores, y, obj.split("+", 1)[1])
        if config.pdaom_reduction == "batch":
            # same per-sample scale as the user-grouped term
            rank = rl.LossGrad(rank.value / y.size, rank.grad / y.size, rank.contributing)
    total = rl.LossGrad(ce.value + config.lam * rank.value, ce.grad + config.lam * rank.grad, rank.contributing)
    return total, ce.value, rank.value, True


def evaluate(params, dataset, tie_mode="half"):
    scores = forward(params, dataset.features)
    return gauc(scores, dataset.labels, dataset.user_ids, TieMode.parse(tie_mode))


def flag_divergence(epoch_rows):
    """Mark epochs where the training loss fell but validation AUC fell too."""
    prev = None
    for row in epoch_rows:
        flag = 0
        if prev is not None and row["train_loss"] < prev["train_loss"] and row["val_auc"] < prev["val_auc"]:
            flag = 1
        row["loss_down_auc_down"] = flag
        prev = row
    return [row["epoch"] for row in epoch_rows if row["loss_down_auc_down"]]


def train(config, train_set, valid_set=None, step_callback=None):
    scorer = ScorerConfig(train_set.dim, config.hidden_dim, config.seed, config.init_scale)
    params = init_params(scorer)
    opt = make_optimizer(config.optimizer, config.lr, config.weight_decay)
    rng = np.random.default_rng(config.data_seed)
    result = RunResult(config, scorer, params)
    step = 0
    for epoch in range(1, config.epochs + 1):
        opt.lr = config.lr * config.lr_decay ** (epoch - 1)
        ordered = shuffle_by_user(train_set, rng)
        losses = []
        for batch in make_batches(ordered, config.batch_size):
            scores, hidden = forward(params, batch.features, return_hidden=True)
            lg, ce_value, rank_value, ranked = batch_objective(config, scores, batch)
            result.rank_evaluations += int(ranked)
            if not np.isfinite(lg.value) or not np.all(np.isfinite(lg.grad)):
                raise TrainingAborted(f"non-finite loss at epoch {epoch} step {step}", epoch, step)
            grads = backward(params, batch.features, lg.grad, scores=scores, hidden=hidden)
            try:
                opt.step(params, grads)
            except TrainingAborted as exc:
                raise TrainingAborted(f"{exc} at epoch {epoch} step {step}", epoch, step) from None
            row = {
                "epoch": epoch, "step": step, "loss": lg.value, "ce_loss": ce_value,
                "rank_loss": rank_value, "contributing": lg.contributing,
            }
            result.steps.append(row)
            if step_callback is not None:
                step_callback(row)
            losses.append(lg.value)
            step += 1
        row = {"epoch": epoch, "train_loss": float(np.mean(losses)) if losses else float("nan"),
               "val_auc": float("nan"), "val_gauc": float("nan")}
        if valid_set is not None:
            report = evaluate(params, valid_set, config.tie_mode)
            row["val_auc"], row["val_gauc"] = report.auc, report.gauc
        result.epochs.append(row)
    flag_divergence(result.epochs)
    return result


def _fmt(v):
    return repr(v) if isinstance(v, float) else v


def write_rows(path, fieldnames, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _fmt(row[k]) for k in fieldnames})


def read_rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
