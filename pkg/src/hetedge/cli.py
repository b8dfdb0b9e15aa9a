"""Command-line front end: one subcommand per pipeline stage.

All stage subcommands operate on a working directory with the standard
artifact layout (see pipeline.workdir_paths). Settings resolve in order:
built-in defaults, then --config file, then explicit flags.
"""

import argparse
import os
import sys

from .benchmark import SynthConfig
from .config import ConfigError, PipelineConfig, load_config, validate
from .edgeops import COMBINERS
from .multigraph import EdgeListError
from .pipeline import StageError, run_pipeline, stage_embed, stage_eval, \
    stage_features, stage_ingest, stage_recommend, stage_synth, stage_train, \
    stage_walk, workdir_paths
from .walks import STRATEGIES


def _shared_flags(p):
    p.add_argument("--config", help="key=value config file (dotted section keys)")
    p.add_argument("--seed", type=int, help="master seed; stage seeds derive from it")
    p.add_argument("--threads", type=int,
                   help="worker threads; 1 gives fully deterministic artifacts")
    p.add_argument("--strategy", choices=STRATEGIES, help="walk strategy")
    p.add_argument("--combiner", choices=COMBINERS, help="edge-vector combiner")
    p.add_argument("--model", choices=("logreg", "mtn"), help="fusion model kind")
    p.add_argument("--types", help="comma-separated edge types to embed")


def _synth_flags(p):
    p.add_argument("--nodes", type=int, default=SynthConfig.nodes)
    p.add_argument("--positives", type=int, default=SynthConfig.positives)
    p.add_argument("--test-fraction", type=float, default=0.3)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="hetedge",
        description="Multi-network node embeddings fused for friend recommendation.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text, workdir=True):
        p = sub.add_parser(name, help=help_text)
        if workdir:
            p.add_argument("--workdir", required=True,
                           help="directory holding the run's artifacts")
        _shared_flags(p)
        return p

    p = add("ingest", "edge list file -> graph artifact")
    p.add_argument("--edges", required=True, help="tab-separated u<TAB>v<TAB>type file")

    p = add("synth", "generate the synthetic benchmark graph + labeled pairs")
    _synth_flags(p)

    add("walk", "graph artifact -> walk corpora")
    add("embed", "walk corpora -> embedding tables")

    p = add("features", "graph + embeddings + labeled pairs -> edge features")
    p.add_argument("--pairs", help="explicit pairs file (default: the workdir's "
                                   "train and test pair files)")
    p.add_argument("--out", help="output features file (with --pairs)")

    add("train", "training features -> fusion model")
    add("eval", "model + held-out features -> predictions and metrics")

    p = add("recommend", "top-k recommendations for the given users")
    p.add_argument("--users", required=True, help="comma-separated user labels")

    p = add("pipeline", "run every stage end to end")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--synth", action="store_true",
                       help="generate the synthetic benchmark as input")
    group.add_argument("--edges", help="edge list file (requires --pairs)")
    p.add_argument("--pairs", help="labeled pairs file, 'u v 0|1' lines")
    p.add_argument("--users", help="comma-separated user labels to recommend for")
    _synth_flags(p)

    return parser


def resolve_config(args) -> PipelineConfig:
    cfg = PipelineConfig()
    if getattr(args, "config", None):
        cfg = load_config(args.config, cfg)
    for flag in ("seed", "threads", "strategy", "combiner", "model"):
        value = getattr(args, flag, None)
        if value is not None and not isinstance(value, bool):
            setattr(cfg, flag, value)
    if getattr(args, "types", None):
        cfg.types = tuple(t.strip() for t in args.types.split(",") if t.strip())
    return validate(cfg)


def _synth_config(args, cfg):
    return SynthConfig(nodes=args.nodes, positives=args.positives, seed=cfg.seed)


def run(args) -> int:
    cfg = resolve_config(args)
    if args.command == "pipeline":
        if args.edges and not args.pairs:
            raise StageError("pipeline --edges also needs --pairs")
        users = args.users.split(",") if args.users else None
        metrics = run_pipeline(
            args.workdir, cfg,
            edges_path=args.edges, pairs_path=args.pairs,
            synth_cfg=_synth_config(args, cfg) if args.synth else None,
            users=users, test_fraction=args.test_fraction)
        for k, v in metrics.items():
            print(f"{k} = {v}")
        return 0

    paths = workdir_paths(args.workdir, cfg)
    if args.command == "ingest":
        os.makedirs(args.workdir, exist_ok=True)
        graph = stage_ingest(args.edges, paths["graph"], types=cfg.types)
        print(f"wrote {paths['graph']}: {graph.num_nodes} nodes, "
              + ", ".join(f"{graph.edge_count(t)} {t}" for t in graph.types))
    elif args.command == "synth":
        os.makedirs(args.workdir, exist_ok=True)
        graph = stage_synth(paths, _synth_config(args, cfg), args.test_fraction)
        print(f"wrote {paths['graph']} ({graph.num_nodes} nodes), "
              f"{paths['pairs_train']}, {paths['pairs_test']}")
    elif args.command == "walk":
        for path in stage_walk(paths["graph"], paths, cfg).values():
            print(f"wrote {path}")
    elif args.command == "embed":
        for path in stage_embed(paths["graph"], paths, cfg).values():
            print(f"wrote {path}")
    elif args.command == "features":
        if args.pairs:
            out = args.out or paths["features_train"]
            stage_features(paths["graph"], paths, args.pairs, out, cfg)
            print(f"wrote {out}")
        else:
            stage_features(paths["graph"], paths, paths["pairs_train"],
                           paths["features_train"], cfg)
            stage_features(paths["graph"], paths, paths["pairs_test"],
                           paths["features_test"], cfg)
            print(f"wrote {paths['features_train']} and {paths['features_test']}")
    elif args.command == "train":
        stage_train(paths["features_train"], paths["model"], cfg)
        print(f"wrote {paths['model']}")
    elif args.command == "eval":
        metrics = stage_eval(paths["graph"], paths["model"],
                             paths["features_test"], paths, cfg)
        for k, v in metrics.items():
            print(f"{k} = {v}")
    elif args.command == "recommend":
        out = stage_recommend(paths["graph"], paths, args.users.split(","), cfg)
        print(f"wrote {out}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return run(args)
    except (ConfigError, StageError, EdgeListError, FileNotFoundError,
            ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
