"""Compare the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--csv out.csv]

Times each kernel at a few sizes on both backends (when the extension is
built) and one full training step per backend, and prints the speedups.
"""
import argparse
import csv
import sys
import timeit

import numpy as np

from rankopt import kernels, ranking_loss as rl
from rankopt.batching import Dataset, make_batches, sort_by_user
from rankopt.model import ScorerConfig, backward, forward, init_params

KIND_PEL = 3
KERNEL_NAMES = ("select_pair", "segment_pairs", "pair_sums")


def _batch(rng, n, n_users):
    users = np.sort(rng.integers(0, n_users, n)).astype(np.int64)
    labels = (rng.random(n) < 0.3).astype(np.int8)
    scores = rng.random(n)
    return scores, labels, users


def kernel_cases(rng):
    for n in (384, 10_000, 1_000_000):
        s, y, u = _batch(rng, n, max(2, n // 20))
        bounds = rl.group_bounds(u)
        yield f"select_pair n={n}", lambda m, s=s, y=y: m.select_pair(s, y)
        yield f"segment_pairs n={n}", lambda m, s=s, y=y, b=bounds: m.segment_pairs(s, y, b)
    for m_pos, m_neg in ((20, 80), (300, 1200)):
        pos = rng.random(m_pos)
        neg = rng.random(m_neg)
        yield f"pair_sums {m_pos}x{m_neg}", lambda m, p=pos, q=neg: m.pair_sums(p, q, KIND_PEL)


def train_step_case(rng, batch_size=384, dim=18, hidden=32):
    n = batch_size * 20
    data = sort_by_user(Dataset(np.sort(rng.integers(0, 400, n)), (rng.random(n) < 0.1).astype(np.int8),
                                rng.standard_normal((n, dim))))
    batches = list(make_batches(data, batch_size))
    params = init_params(ScorerConfig(dim, hidden, seed=0))

    def step(module):
        saved = {k: getattr(kernels, k) for k in KERNEL_NAMES}
        # the loss functions look the kernels up on the module at call time
        for k in KERNEL_NAMES:
            setattr(kernels, k, getattr(module, k))
        try:
            for b in batches:
                s, h = forward(params, b.features, return_hidden=True)
                lg = rl.combined_objective(s, b.labels, b.user_ids, "pel", 10.0, reduction="batch")
                backward(params, b.features, lg.grad, scores=s, hidden=h)
        finally:
            for k, v in saved.items():
                setattr(kernels, k, v)

    return f"train epoch ({len(batches)} batches of {batch_size})", step


def time_case(fn, module, repeat):
    number = 1
    while True:
        t = min(timeit.repeat(lambda: fn(module), number=number, repeat=1))
        if t > 0.05 or number > 1e5:
            break
        number *= 4
    return min(timeit.repeat(lambda: fn(module), number=number, repeat=repeat)) / number


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--csv", help="also write the timings here")
    args = ap.parse_args(argv)

    found = kernels.backends()
    if "cython" not in found:
        print("compiled extension not built; run `python3 setup.py build_ext --inplace`", file=sys.stderr)
    names = sorted(found, key=lambda k: k != "cython")
    rng = np.random.default_rng(0)
    cases = list(kernel_cases(rng)) + [train_step_case(rng)]

    rows = []
    header = f"{'case':42s}" + "".join(f"{n:>14s}" for n in names) + ("     speedup" if len(names) > 1 else "")
    print(header)
    for label, fn in cases:
        times = {n: time_case(fn, found[n], args.repeat) for n in names}
        line = f"{label:42s}" + "".join(f"{times[n] * 1e6:12.1f}us" for n in names)
        if len(names) > 1:
            line += f"{times['python'] / times['cython']:11.1f}x"
        print(line)
        rows.append({"case": label, **{f"{n}_seconds": repr(times[n]) for n in names}})

    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]))
            w.writeheader()
            w.writerows(rows)


if __name__ == "__main__":
    main()
