"""File-based pipeline stages and the end-to-end driver.

Every stage reads versioned artifacts, does one job, and writes versioned
artifacts, so runs can be resumed, inspected, or diffed file by file:

    ingest / synth -> graph.txt (+ pairs_train.txt / pairs_test.txt)
    walk           -> walks_<tag>.txt          (tag = edge type, or "multi")
    embed          -> emb_<tag>.txt + .meta
    features       -> features_<split>.bin
    train          -> model.txt
    eval           -> predictions.txt, metrics.txt
    recommend      -> recommendations.txt, blooms.bin

All floats serialize through repr(), orderings are fixed, and stage seeds
derive from the master seed, so single-threaded runs with equal seeds
produce byte-identical artifacts.
"""

import json
import os
from dataclasses import asdict, replace

import numpy as np

from .benchmark import SynthConfig, make_benchmark, split_pairs
from .config import PipelineConfig, derive_seed, validate
from .edgeops import batch_assemble, load_features, save_features
from .evaluation import TemporalSplit, auc, format_metrics, precision_at_k, \
    write_predictions
from .fusion import load_model, predict, save_model, train_logreg, train_mtn
from .multigraph import DEFAULT_TYPES, MultiGraph, load_edge_list
from .serving import NnIndex, ServingState, load_blooms, recommend, save_blooms
from .sgns import EmbeddingTable, load_embedding, save_embedding, train_sgns
from .walks import HOMOGENEOUS_STRATEGIES, WalkConfig, generate_corpus, \
    load_corpus, save_corpus

PAIRS_MAGIC = "hetedge-pairs v1"
METRICS_MAGIC = "hetedge-metrics v1"
RECS_MAGIC = "hetedge-recommendations v1"

MULTI_TAG = "multi"


class StageError(RuntimeError):
    """A pipeline stage received inconsistent or missing inputs."""


def tags_for(cfg: PipelineConfig):
    """Artifact tags: one per edge type, or a single multi-graph tag."""
    return list(cfg.types) if cfg.strategy in HOMOGENEOUS_STRATEGIES else [MULTI_TAG]


def workdir_paths(workdir, cfg: PipelineConfig):
    """The standard artifact layout inside a working directory."""
    j = lambda name: os.path.join(workdir, name)
    tags = tags_for(cfg)
    return {
        "graph": j("graph.txt"),
        "pairs_train": j("pairs_train.txt"),
        "pairs_test": j("pairs_test.txt"),
        "walks": {t: j(f"walks_{t}.txt") for t in tags},
        "emb": {t: j(f"emb_{t}.txt") for t in tags},
        "features_train": j("features_train.bin"),
        "features_test": j("features_test.bin"),
        "model": j("model.txt"),
        "predictions": j("predictions.txt"),
        "metrics": j("metrics.txt"),
        "blooms": j("blooms.bin"),
        "recommendations": j("recommendations.txt"),
    }


# -- labeled pairs ------------------------------------------------------------------

def write_pairs(path, node_labels, pairs, y):
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"# {PAIRS_MAGIC}\n")
        for (u, v), yy in zip(pairs, y):
            f.write(f"{node_labels[u]} {node_labels[v]} {int(yy)}\n")


def read_pairs(path, label_to_id):
    """(pairs (m, 2) int array, labels (m,) 0/1 array) from a pairs file."""
    pairs, y = [], []
    with open(path, encoding="utf-8") as f:
        header = f.readline().strip()
        if header != f"# {PAIRS_MAGIC}":
            raise StageError(f"bad pairs header in {path}: expected '# {PAIRS_MAGIC}'")
        for lineno, line in enumerate(f, start=2):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 3 or parts[2] not in ("0", "1"):
                raise StageError(f"{path}:{lineno}: expected 'u v 0|1', got {line!r}")
            try:
                pairs.append((label_to_id[parts[0]], label_to_id[parts[1]]))
            except KeyError as e:
                raise StageError(f"{path}:{lineno}: unknown node {e}") from None
            y.append(int(parts[2]))
    return np.array(pairs, dtype=np.int64).reshape(-1, 2), np.array(y, dtype=np.int64)


# -- stages -------------------------------------------------------------------------

def stage_ingest(edges_path, graph_path, types=DEFAULT_TYPES):
    graph = load_edge_list(edges_path, types=types)
    graph.save(graph_path)
    return graph


def stage_synth(paths, synth_cfg: SynthConfig, test_fraction=0.3):
    """Generate the synthetic benchmark and write graph + labeled pair files."""
    graph, split = make_benchmark(synth_cfg)
    graph.save(paths["graph"])
    tr_p, tr_y, te_p, te_y = split_pairs(split, synth_cfg.seed, test_fraction)
    write_pairs(paths["pairs_train"], graph.labels, tr_p, tr_y)
    write_pairs(paths["pairs_test"], graph.labels, te_p, te_y)
    return graph


def _load_graph(graph_path):
    try:
        return MultiGraph.load(graph_path)
    except FileNotFoundError:
        raise StageError(f"graph artifact missing: {graph_path}") from None


def stage_walk(graph_path, paths, cfg: PipelineConfig):
    """One corpus per tag: per-type subgraph walks, or multi-graph walks."""
    graph = _load_graph(graph_path)
    for t in cfg.types:
        if t not in graph.types:
            raise StageError(f"config type {t!r} not declared in graph "
                             f"(has {graph.types})")
    ghash = graph.content_hash()
    out = {}
    for tag in tags_for(cfg):
        target = graph.split(tag) if tag != MULTI_TAG else graph
        wc = WalkConfig(walks_per_node=cfg.walk.walks_per_node,
                        walk_length=cfg.walk.walk_length,
                        strategy=cfg.strategy, p=cfg.walk.p, q=cfg.walk.q,
                        seed=derive_seed(cfg.seed, f"walk:{tag}"))
        corpus = generate_corpus(target, wc, threads=cfg.threads, graph_hash=ghash)
        save_corpus(corpus, graph.labels, paths["walks"][tag])
        out[tag] = paths["walks"][tag]
    return out


def stage_embed(graph_path, paths, cfg: PipelineConfig):
    """Train one embedding table per corpus; word-vector text + .meta sidecar."""
    graph = _load_graph(graph_path)
    ghash = graph.content_hash()
    out = {}
    for tag in tags_for(cfg):
        corpus = load_corpus(paths["walks"][tag], graph.label_to_id)
        if corpus.graph_hash and corpus.graph_hash != ghash:
            raise StageError(f"corpus {paths['walks'][tag]} was generated from a "
                             f"different graph ({corpus.graph_hash} != {ghash})")
        scfg = replace(cfg.sgns, seed=derive_seed(cfg.seed, f"sgns:{tag}"))
        table = train_sgns(corpus, scfg, threads=cfg.threads, edge_type=tag)
        emb_path = paths["emb"][tag]
        save_embedding(table, graph.labels, emb_path)
        meta = dict(sorted({**asdict(scfg), "edge_type": tag, "graph": ghash,
                            "strategy": cfg.strategy}.items()))
        with open(emb_path + ".meta", "w", encoding="utf-8") as f:
            json.dump(meta, f, indent=0, sort_keys=True)
            f.write("\n")
        out[tag] = emb_path
    return out


def _active_mask(graph: MultiGraph, tag):
    """Trained-row mask reconstructed from degrees (walks of length >= 2)."""
    if tag == MULTI_TAG:
        deg = np.array([graph.degree(v) for v in range(graph.num_nodes)])
    else:
        deg = np.array([graph.degree(v, tag) for v in range(graph.num_nodes)])
    return deg > 0


def load_tables(graph: MultiGraph, emb_paths, cfg: PipelineConfig):
    tables = []
    for tag in tags_for(cfg):
        labels, mat = load_embedding(emb_paths[tag])
        if labels != list(graph.labels):
            raise StageError(f"embedding {emb_paths[tag]} does not cover the "
                             "graph's node set in order")
        tables.append(EmbeddingTable(vectors=mat, edge_type=tag,
                                     active=_active_mask(graph, tag)))
    return tables


def stage_features(graph_path, paths, pairs_path, out_path, cfg: PipelineConfig):
    graph = _load_graph(graph_path)
    tables = load_tables(graph, paths["emb"], cfg)
    pairs, y = read_pairs(pairs_path, graph.label_to_id)
    if len(pairs) == 0:
        raise StageError(f"no labeled pairs in {pairs_path}")
    mats = batch_assemble(tables, pairs, cfg.combiner)
    save_features(out_path, pairs, y, mats, cfg.combiner,
                  types=[t.edge_type for t in tables],
                  graph_hash=graph.content_hash())
    return out_path


def stage_train(features_path, model_path, cfg: PipelineConfig):
    pairs, y, mats, meta = load_features(features_path)
    tcfg = replace(cfg.train, seed=derive_seed(cfg.seed, "train"))
    if cfg.model == "logreg":
        model = train_logreg(mats, y, tcfg)
    else:
        model = train_mtn(mats, y, tcfg)
    save_model(model, model_path, types=meta["types"], combiner=meta["mode"])
    return model


def stage_eval(graph_path, model_path, features_path, paths, cfg: PipelineConfig):
    """Score held-out pairs; write predictions and a metrics report."""
    graph = _load_graph(graph_path)
    model, mmeta = load_model(model_path)
    pairs, y, mats, fmeta = load_features(features_path)
    if list(mmeta["types"]) != list(fmeta["types"]) or mmeta["combiner"] != fmeta["mode"]:
        raise StageError("model and features disagree on types/combiner: "
                         f"{mmeta} vs {fmeta['types']}/{fmeta['mode']}")
    scores = np.asarray(predict(model, mats), dtype=np.float64)
    write_predictions(paths["predictions"], pairs, y, scores, graph.labels)

    ranked, truth = {}, {}
    for (u, v), yy, s in zip(pairs, y, scores):
        ranked.setdefault(int(u), []).append((int(v), float(s)))
        if yy == 1:
            truth.setdefault(int(u), set()).add(int(v))
    for u in ranked:
        ranked[u].sort(key=lambda cs: (-cs[1], cs[0]))
    metrics = {
        "auc": repr(auc(scores, y)),
        f"precision_at_{cfg.eval.k}": repr(precision_at_k(ranked, truth, cfg.eval.k)),
        "pairs": len(y),
        "positives": int(y.sum()),
    }
    with open(paths["metrics"], "w", encoding="utf-8") as f:
        f.write(f"# {METRICS_MAGIC}\n")
        f.write(format_metrics(metrics))
    return metrics


def stage_recommend(graph_path, paths, users, cfg: PipelineConfig):
    """Top-k recommendations per user; persists the updated Bloom filters."""
    graph = _load_graph(graph_path)
    tables = load_tables(graph, paths["emb"], cfg)
    model, _ = load_model(paths["model"])
    tags = tags_for(cfg)
    index_tag = "friend" if "friend" in tags else tags[0]
    index = NnIndex(tables[tags.index(index_tag)].vectors)
    blooms = load_blooms(paths["blooms"]) if os.path.exists(paths["blooms"]) else {}
    state = ServingState(index=index, graph=graph, tables=tables, model=model,
                         combiner=cfg.combiner, blooms=blooms,
                         bloom_seed=derive_seed(cfg.seed, "bloom"))
    lines = []
    for label in users:
        if label not in graph.label_to_id:
            raise StageError(f"unknown user {label!r}")
        picks = recommend(state, graph.label_to_id[label],
                          k=cfg.serving.k, pool_size=cfg.serving.pool_size)
        for rank, (node, prob) in enumerate(picks, start=1):
            lines.append(f"{label} {rank} {graph.labels[node]} {repr(prob)}\n")
    with open(paths["recommendations"], "w", encoding="utf-8") as f:
        f.write(f"# {RECS_MAGIC}\n")
        f.writelines(lines)
    save_blooms(state.blooms, paths["blooms"])
    return paths["recommendations"]


# -- end-to-end driver ---------------------------------------------------------------

def run_pipeline(workdir, cfg: PipelineConfig, edges_path=None, pairs_path=None,
                 synth_cfg: SynthConfig = None, users=None, test_fraction=0.3):
    """Full run: data -> walks -> embeddings -> features -> model -> metrics.

    Data comes either from `synth_cfg` (generated benchmark) or from
    `edges_path` plus a labeled `pairs_path` (split train/test here).
    Returns the metrics dict; artifact paths come from workdir_paths().
    """
    validate(cfg)
    os.makedirs(workdir, exist_ok=True)
    paths = workdir_paths(workdir, cfg)

    if synth_cfg is not None:
        stage_synth(paths, synth_cfg, test_fraction)
    elif edges_path is not None and pairs_path is not None:
        graph = stage_ingest(edges_path, paths["graph"], types=cfg.types)
        pairs, y = read_pairs(pairs_path, graph.label_to_id)
        split = TemporalSplit(positives=pairs[y == 1], negatives=pairs[y == 0])
        tr_p, tr_y, te_p, te_y = split_pairs(split, cfg.seed, test_fraction)
        write_pairs(paths["pairs_train"], graph.labels, tr_p, tr_y)
        write_pairs(paths["pairs_test"], graph.labels, te_p, te_y)
    else:
        raise StageError("run_pipeline needs synth_cfg, or edges_path + pairs_path")

    stage_walk(paths["graph"], paths, cfg)
    stage_embed(paths["graph"], paths, cfg)
    stage_features(paths["graph"], paths, paths["pairs_train"],
                   paths["features_train"], cfg)
    stage_features(paths["graph"], paths, paths["pairs_test"],
                   paths["features_test"], cfg)
    stage_train(paths["features_train"], paths["model"], cfg)
    metrics = stage_eval(paths["graph"], paths["model"], paths["features_test"],
                         paths, cfg)
    if users:
        stage_recommend(paths["graph"], paths, users, cfg)
    return metrics
