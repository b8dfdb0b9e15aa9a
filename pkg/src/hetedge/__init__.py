"""Multi-network node embeddings fused for friend recommendation.

Pipeline: a typed undirected multi-graph is split (or walked jointly),
skip-gram embeddings are trained per subnetwork, node pairs become
per-type edge vectors, and a fusion model turns those into a link
probability that drives evaluation and serving.
"""

from .benchmark import SynthConfig, make_benchmark, run_variant
from .config import ConfigError, PipelineConfig, derive_seed, load_config
from .edgeops import COMBINERS, HeteroEdgeFeatures, assemble, batch_assemble, \
    combine, edge_dim, load_features, save_features
from .evaluation import TemporalSplit, auc, precision_at_k, temporal_split
from .fusion import LogRegModel, MultiTowerNet, TrainConfig, forward_mtn, \
    load_model, predict, save_model, train_logreg, train_mtn
from .multigraph import DEFAULT_TYPES, EdgeListError, HomogeneousGraph, \
    MultiGraph, from_edges, load_edge_list
from .pipeline import StageError, run_pipeline, workdir_paths
from .serving import BloomFilter, NnIndex, ServingState, bloom_fp_rate, \
    bloom_params, load_blooms, recommend, save_blooms
from .sgns import EmbeddingTable, NoiseDistribution, SgnsConfig, \
    build_noise_distribution, cosine, load_embedding, save_embedding, train_sgns
from .walks import STRATEGIES, WalkConfig, WalkCorpus, generate_corpus, \
    load_corpus, save_corpus

__version__ = "0.1.0"
