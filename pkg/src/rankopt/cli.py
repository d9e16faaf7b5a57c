"""Command-line entry point: ``rankopt {gen,train,eval,sweep,compare}``.

Options come from an optional ``key=value`` config file (``--config``) and
are overridden by ``--set key=value`` and by the dedicated flags. Every
output is CSV (plus a JSON checkpoint). On failure a single line
``error: <ErrorType>: <message>`` is written to stderr and the exit code is
non-zero.
"""
import argparse
import os
import sys

import numpy as np

from . import harness, options
from .batching import read_dataset, read_truth
from .datagen import GenConfig, generate, split_by_user, truth_path, write_log
from .errors import ConfigError, RankOptError
from .metrics import TieMode
from .model import forward, load_checkpoint, save_checkpoint
from .trainer import EPOCH_FIELDS, STEP_FIELDS, RunConfig, evaluate, train, write_rows

GEN_SUMMARY_FIELDS = ["split", "n_samples", "n_users", "pos_rate", "bayes_auc", "bayes_gauc"]
SEGMENT_FIELDS = ["segment", "auc", "gauc", "n_groups", "n_skipped", "n_samples"]


def read_kv_file(path):
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value")
            key, value = line.split("=", 1)
            values[key.strip()] = value.strip()
    return values


def parse_overrides(items):
    values = {}
    for item in items or []:
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value")
        key, value = item.split("=", 1)
        values[key.strip()] = value.strip()
    return values


def collect_options(args, flag_map):
    opts = read_kv_file(args.config) if args.config else {}
    opts.update(parse_overrides(args.set))
    for dest, key in flag_map.items():
        value = getattr(args, dest, None)
        if value is not None:
            opts[key] = value
    return opts


def gen_config_from(opts):
    return options.build(GenConfig, opts, what="generator option")


def write_lines(path, lines):
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def cmd_gen(args):
    config = gen_config_from(collect_options(args, {"seed": "seed"}))
    os.makedirs(args.out, exist_ok=True)
    log = generate(config)
    parts = split_by_user(log, seed=config.seed)
    rows = []
    for name, part in zip(harness.SPLITS, parts):
        path = os.path.join(args.out, f"{name}.csv")
        write_log(path, part)
        ds = part.dataset
        rep = harness.gauc(part.truth, ds.labels, ds.user_ids, TieMode.HalfCredit)
        rows.append({"split": name, "n_samples": len(ds), "n_users": int(np.unique(ds.user_ids).size),
                     "pos_rate": float(ds.labels.mean()), "bayes_auc": rep.auc, "bayes_gauc": rep.gauc})
    write_rows(os.path.join(args.out, "gen_summary.csv"), GEN_SUMMARY_FIELDS, rows)
    write_lines(os.path.join(args.out, "gen_config.txt"), harness.config_lines(config))
    return 0


RUN_FLAGS = {
    "objective": "objective", "surrogate": "surrogate", "lam": "lam", "batch_size": "batch_size",
    "epochs": "epochs", "lr": "lr", "seed": "seed", "tie_mode": "tie_mode",
}


def run_config_from(args):
    opts = collect_options(args, RUN_FLAGS)
    if args.seed is not None and "data_seed" not in opts:
        opts["data_seed"] = args.seed
    return RunConfig.from_mapping(opts)


def cmd_train(args):
    config = run_config_from(args)
    splits = harness.load_splits(args.data)
    os.makedirs(args.out, exist_ok=True)
    result = train(config, splits["train"], splits["valid"])
    save_checkpoint(os.path.join(args.out, "checkpoint.json"), result.scorer, result.params,
                    extra={"run": harness.config_lines(config)})
    write_rows(os.path.join(args.out, "train_log.csv"), STEP_FIELDS, result.steps)
    write_rows(os.path.join(args.out, "epoch_log.csv"), EPOCH_FIELDS, result.epochs)
    report = evaluate(result.params, splits["test"], config.tie_mode)
    report.write_csv(os.path.join(args.out, "test_metrics.csv"))
    write_lines(os.path.join(args.out, "run_config.txt"), harness.config_lines(config))
    flagged = [r["epoch"] for r in result.epochs if r["loss_down_auc_down"]]
    print(f"test_auc={report.auc!r} test_gauc={report.gauc!r} divergent_epochs={flagged}")
    return 0


def cmd_eval(args):
    dataset = read_dataset(args.dataset)
    if args.truth:
        scores = read_truth(truth_path(args.dataset))
        if scores.shape[0] != len(dataset):
            raise ConfigError("truth sidecar does not match the dataset length")
    else:
        if not args.checkpoint:
            raise ConfigError("eval needs --checkpoint or --truth")
        _, params, _ = load_checkpoint(args.checkpoint)
        scores = forward(params, dataset.features)
    os.makedirs(args.out, exist_ok=True)
    reports = harness.segment_reports(scores, dataset, args.tie_mode)
    rows = []
    active, inactive = harness.activity_split(dataset.user_ids)
    sizes = {"all": len(dataset), "active": int(np.isin(dataset.user_ids, active).sum()),
             "inactive": int(np.isin(dataset.user_ids, inactive).sum())}
    for name, rep in reports.items():
        rows.append({"segment": name, **rep.row(), "n_samples": sizes[name]})
    write_rows(os.path.join(args.out, "metrics.csv"), SEGMENT_FIELDS, rows)
    reports["all"].write_csv(os.path.join(args.out, "report.csv"), os.path.join(args.out, "groups.csv"))
    print(f"auc={reports['all'].auc!r} gauc={reports['all'].gauc!r}")
    return 0


def _parse_list(text, cast):
    try:
        return [cast(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"bad list {text!r}") from None


def cmd_sweep(args):
    config = run_config_from(args)
    cast = int if args.axis == "batch_size" else float
    values = _parse_list(args.values, cast)
    seeds = _parse_list(args.seeds, int)
    splits = harness.load_splits(args.data)
    rows = harness.sweep(config, splits, args.axis, values, seeds, out_dir=args.out)
    for row in rows:
        print(f"{row['axis']}={row['value']} delta_auc={row['delta_auc']:+.5f} delta_gauc={row['delta_gauc']:+.5f}")
    return 0


def cmd_compare(args):
    config = run_config_from(args)
    objectives = [o.strip() for o in args.objectives.split(",") if o.strip()]
    for obj in objectives:
        RunConfig.from_mapping({"objective": obj})
    seeds = _parse_list(args.seeds, int)
    splits = harness.load_splits(args.data)
    summary, _ = harness.compare_objectives(config, splits, objectives, seeds, out_dir=args.out)
    for row in summary:
        print(f"{row['objective']}: auc={row['mean_auc']:.5f} gauc={row['mean_gauc']:.5f} "
              f"delta_gauc={row['delta_gauc']:+.5f} p={row['sign_test_p']:.4f}")
    return 0


def _common(p):
    p.add_argument("--config", help="key=value options file")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override an option (repeatable)")


def _run_flags(p):
    p.add_argument("--data", required=True, help="directory holding train/valid/test .csv files")
    p.add_argument("--objective")
    p.add_argument("--surrogate", choices=["pll", "phl", "psl", "pel"])
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--tie-mode", dest="tie_mode", choices=["half", "strict"])


def build_parser():
    parser = argparse.ArgumentParser(prog="rankopt", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a synthetic click log split 80/10/10 by user")
    _common(p)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("train", help="train one model and write checkpoint and logs")
    _common(p)
    _run_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="AUC/GAUC report with active/inactive user split")
    p.add_argument("--dataset", required=True)
    p.add_argument("--checkpoint")
    p.add_argument("--truth", action="store_true", help="score with the generator's true probabilities")
    p.add_argument("--tie-mode", dest="tie_mode", choices=["half", "strict"], default="half")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="CE+PDAOM deltas over batch size or lambda")
    _common(p)
    _run_flags(p)
    p.add_argument("--axis", required=True, choices=["batch_size", "lambda"])
    p.add_argument("--values", required=True, help="comma-separated values")
    p.add_argument("--seeds", default="0")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("compare", help="paired-seed comparison of objectives")
    _common(p)
    _run_flags(p)
    p.add_argument("--objectives", default="ce,ce+pdaom")
    p.add_argument("--seeds", default="0,1,2,3,4")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (RankOptError, OSError, ValueError) as exc:
        message = str(exc).replace("\n", " ")
        print(f"error: {type(exc).__name__}: {message}", file=sys.stderr)
        return 2 if isinstance(exc, ConfigError) else 1


if __name__ == "__main__":
    sys.exit(main())
