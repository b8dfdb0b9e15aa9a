#!/usr/bin/env python3
"""Sweep embedding strategies and fusion models on the synthetic benchmark.

Prints one row per (strategy, types, combiner, model) combination with the
held-out AUC per seed. The interesting comparison is the friend-only baseline
against anything that also sees the contact and chat layers.
"""

import argparse
import sys
import time

import numpy as np

from hetedge.benchmark import SynthConfig, make_benchmark, run_variant

VARIANTS = [
    # label                        strategy       types          combiner       model
    ("friend-only deepwalk+logreg", "uniform",     ("friend",),   "concatenate", "logreg"),
    ("friend-only deepwalk+mtn",    "uniform",     ("friend",),   "concatenate", "mtn"),
    ("all-types uniform+logreg",    "uniform",     None,          "concatenate", "logreg"),
    ("all-types node2vec+logreg",   "node2vec",    None,          "concatenate", "logreg"),
    ("all-types node2vec+hadamard", "node2vec",    None,          "hadamard",    "mtn"),
    ("all-types node2vec+mtn",      "node2vec",    None,          "concatenate", "mtn"),
    ("multigraph hetero+mtn",       "hetero",      None,          "concatenate", "mtn"),
    ("multigraph uniformbias+mtn",  "uniformbias", None,          "concatenate", "mtn"),
]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=3, help="number of seeds to average")
    ap.add_argument("--nodes", type=int, default=SynthConfig.nodes)
    ap.add_argument("--positives", type=int, default=SynthConfig.positives)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--only", help="substring filter on variant labels")
    args = ap.parse_args(argv)

    variants = [v for v in VARIANTS if not args.only or args.only in v[0]]
    if not variants:
        ap.error(f"no variant label contains {args.only!r}")

    width = max(len(v[0]) for v in variants)
    header = f"{'variant':<{width}}  " + "  ".join(
        f"seed{s:<2d}" for s in range(args.seeds)) + "   mean    time"
    print(header)
    print("-" * len(header))

    for label, strategy, types, combiner, model in variants:
        aucs, t0 = [], time.perf_counter()
        for seed in range(args.seeds):
            graph, split = make_benchmark(
                SynthConfig(nodes=args.nodes, positives=args.positives, seed=seed))
            res = run_variant(graph, split, strategy=strategy, combiner=combiner,
                              model=model, types=types, seed=seed,
                              threads=args.threads)
            aucs.append(res["auc"])
        elapsed = time.perf_counter() - t0
        cells = "  ".join(f"{a:.4f}" for a in aucs)
        print(f"{label:<{width}}  {cells}  {np.mean(aucs):.4f}  {elapsed:5.1f}s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
