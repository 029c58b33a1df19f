"""Content-augmented graph neural networks in plain numpy.

Two pipelines around a hand-written GNN core: a supervised model fusing
autoencoder content embeddings with structural embeddings, and a
semi-supervised model convolving over the input graph and a cosine
similarity content graph in parallel. Everything differentiable is
backpropagated by hand and verified against finite differences.
"""

from .augs import AugsConfig, AugsModel, MlpClassifier, train_augs, train_baseline_mlp
from .augss import AugssConfig, AugssModel, train_augss
from .autoencoder import AutoencoderModel, build_architecture, reconstruction_loss, train_autoencoder
from .backbone import BackboneClassifier, propagation_context
from .data import (
    SplitSpec,
    dataset_info,
    load_dataset,
    load_split,
    make_split,
    save_split,
    semi_supervised_split,
    supervised_split,
    write_dataset,
)
from .errors import (
    CagnnError,
    ConfigError,
    DataError,
    DegenerateNodeError,
    NumericalError,
    ShapeError,
)
from .graph import (
    Graph,
    add_self_loops,
    build_adjacency,
    build_content_graph,
    content_adjacency,
    cosine_similarity,
    cosine_similarity_matrix,
    grid_search_epsilon,
    symmetric_normalize,
    with_self_loops,
)
from .layers import GatLayer, GcnLayer, LinkxLayer, Residual, generic_message_pass
from .metrics import (
    MetricsReport,
    accuracy,
    aggregate_runs,
    auc,
    macro_auc,
    macro_f1,
    roc_csv,
    roc_curve,
)
from .nn import (
    Adam,
    AdamConfig,
    Linear,
    Param,
    cross_entropy_loss,
    dropout,
    finite_difference_check,
    glorot_init,
    relu,
    softmax_rows,
)
from .rng import make_rng
from .runner import RunConfig, grid_eps_experiment, load_trained_model, run_experiment, save_trained_model

__version__ = "0.1.0"

__all__ = [
    "Adam",
    "AdamConfig",
    "AugsConfig",
    "AugsModel",
    "AugssConfig",
    "AugssModel",
    "AutoencoderModel",
    "BackboneClassifier",
    "CagnnError",
    "ConfigError",
    "DataError",
    "DegenerateNodeError",
    "GatLayer",
    "GcnLayer",
    "Graph",
    "Linear",
    "LinkxLayer",
    "MetricsReport",
    "MlpClassifier",
    "NumericalError",
    "Param",
    "Residual",
    "RunConfig",
    "ShapeError",
    "SplitSpec",
    "accuracy",
    "add_self_loops",
    "aggregate_runs",
    "auc",
    "build_adjacency",
    "build_architecture",
    "build_content_graph",
    "content_adjacency",
    "cosine_similarity",
    "cosine_similarity_matrix",
    "cross_entropy_loss",
    "dataset_info",
    "dropout",
    "finite_difference_check",
    "generic_message_pass",
    "glorot_init",
    "grid_eps_experiment",
    "grid_search_epsilon",
    "load_dataset",
    "load_split",
    "load_trained_model",
    "macro_auc",
    "macro_f1",
    "make_rng",
    "make_split",
    "propagation_context",
    "reconstruction_loss",
    "relu",
    "roc_csv",
    "roc_curve",
    "run_experiment",
    "save_split",
    "save_trained_model",
    "semi_supervised_split",
    "softmax_rows",
    "supervised_split",
    "symmetric_normalize",
    "train_augs",
    "train_augss",
    "train_autoencoder",
    "train_baseline_mlp",
    "with_self_loops",
    "write_dataset",
]
