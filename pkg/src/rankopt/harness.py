"""Multi-run experiments: paired-seed objective comparisons and 1-d sweeps."""
import os
from dataclasses import asdict

import numpy as np
from scipy.stats import binomtest

from .batching import read_dataset
from .errors import ConfigError
from .metrics import TieMode, gauc
from .trainer import evaluate, train, write_rows

SPLITS = ("train", "valid", "test")

RUN_FIELDS = ["objective", "seed", "test_auc", "test_gauc"]
COMPARE_FIELDS = ["objective", "n_seeds", "mean_auc", "mean_gauc", "delta_auc", "delta_gauc",
                  "gauc_wins", "gauc_losses", "sign_test_p"]
SWEEP_FIELDS = ["axis", "value", "n_seeds", "auc", "gauc", "baseline_auc", "baseline_gauc",
                "delta_auc", "delta_gauc"]
SWEEP_AXES = ("batch_size", "lambda")


def load_splits(data_dir):
    out = {}
    for name in SPLITS:
        path = os.path.join(data_dir, f"{name}.csv")
        if not os.path.exists(path):
            raise FileNotFoundError(f"missing split file {path}")
        out[name] = read_dataset(path)
    return out


def activity_split(user_ids):
    """Users ranked by impression count, split evenly into (active, inactive) ID sets.

    Ties in count are broken by user ID; with an odd number of users the
    extra one goes to the active half.
    """
    uids, counts = np.unique(user_ids, return_counts=True)
    order = np.lexsort((uids, -counts))
    n_active = (uids.size + 1) // 2
    return uids[order[:n_active]], uids[order[n_active:]]


def segment_reports(scores, dataset, tie_mode="half"):
    """MetricReports for all users and for the active / inactive halves."""
    ties = TieMode.parse(tie_mode)
    reports = {"all": gauc(scores, dataset.labels, dataset.user_ids, ties)}
    active, inactive = activity_split(dataset.user_ids)
    for name, group in (("active", active), ("inactive", inactive)):
        mask = np.isin(dataset.user_ids, group)
        reports[name] = gauc(scores[mask], dataset.labels[mask], dataset.user_ids[mask], ties)
    return reports


def run_seed(config, splits, seed):
    cfg = config.with_(seed=seed, data_seed=seed)
    result = train(cfg, splits["train"], splits["valid"])
    report = evaluate(result.params, splits["test"], cfg.tie_mode)
    return result, report


def sign_test(deltas):
    """One-sided sign test that positive deltas dominate; zero deltas are dropped."""
    deltas = np.asarray(deltas, dtype=np.float64)
    wins = int(np.sum(deltas > 0))
    losses = int(np.sum(deltas < 0))
    if wins + losses == 0:
        return wins, losses, 1.0
    return wins, losses, float(binomtest(wins, wins + losses, 0.5, alternative="greater").pvalue)


def compare_objectives(config, splits, objectives, seeds, out_dir=None):
    """Train every objective on the same seeds; deltas are against the first objective."""
    if not objectives:
        raise ConfigError("need at least one objective to compare")
    per_run = []
    metrics = {}
    for obj in objectives:
        cfg = config.with_(objective=obj)
        metrics[obj] = []
        for seed in seeds:
            _, report = run_seed(cfg, splits, seed)
            metrics[obj].append((report.auc, report.gauc))
            per_run.append({"objective": obj, "seed": seed, "test_auc": report.auc, "test_gauc": report.gauc})
    base = np.array(metrics[objectives[0]])
    summary = []
    for obj in objectives:
        m = np.array(metrics[obj])
        d = m - base
        wins, losses, p = sign_test(d[:, 1])
        summary.append({
            "objective": obj, "n_seeds": len(seeds),
            "mean_auc": float(m[:, 0].mean()), "mean_gauc": float(m[:, 1].mean()),
            "delta_auc": float(d[:, 0].mean()), "delta_gauc": float(d[:, 1].mean()),
            "gauc_wins": wins, "gauc_losses": losses, "sign_test_p": p,
        })
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        write_rows(os.path.join(out_dir, "compare_runs.csv"), RUN_FIELDS, per_run)
        write_rows(os.path.join(out_dir, "compare.csv"), COMPARE_FIELDS, summary)
    return summary, per_run


def sweep(config, splits, axis, values, seeds, out_dir=None):
    """CE+PDAOM at each axis value, reported as deltas against plain CE.

    The CE baseline shares seeds with every swept run; for the batch-size
    axis it is retrained at the same batch size.
    """
    if axis not in SWEEP_AXES:
        raise ConfigError(f"sweep axis must be one of {', '.join(SWEEP_AXES)}")
    if not values:
        raise ConfigError("sweep needs at least one value")
    config = config.with_(objective="ce+pdaom")
    baselines = {}

    def baseline(cfg):
        key = cfg.batch_size
        if key not in baselines:
            ce = cfg.with_(objective="ce")
            baselines[key] = np.array([[r.auc, r.gauc] for r in (run_seed(ce, splits, s)[1] for s in seeds)])
        return baselines[key]

    rows = []
    for value in values:
        if axis == "batch_size":
            cfg = config.with_(batch_size=int(value))
        else:
            cfg = config.with_(lam=float(value))
        base = baseline(cfg)
        runs = np.array([[r.auc, r.gauc] for r in (run_seed(cfg, splits, s)[1] for s in seeds)])
        d = runs - base
        rows.append({
            "axis": axis, "value": value, "n_seeds": len(seeds),
            "auc": float(runs[:, 0].mean()), "gauc": float(runs[:, 1].mean()),
            "baseline_auc": float(base[:, 0].mean()), "baseline_gauc": float(base[:, 1].mean()),
            "delta_auc": float(d[:, 0].mean()), "delta_gauc": float(d[:, 1].mean()),
        })
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        write_rows(os.path.join(out_dir, "sweep.csv"), SWEEP_FIELDS, rows)
    return rows


def config_lines(obj):
    return [f"{k}={v}" for k, v in asdict(obj).items()]
