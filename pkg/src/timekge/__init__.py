"""Temporal knowledge-graph completion with low-rank bilinear fusion.

The package factors into:

* :mod:`timekge.kernels` / :mod:`timekge.gradcheck` -- reference dense
  kernels and finite-difference gradient checking;
* :mod:`timekge.datasets` -- quadruple parsing, vocabularies, reciprocal
  augmentation, time resampling, 1-N target grouping;
* :mod:`timekge.time_encoding` -- per-timestamp and cycle-decomposition
  time encoders;
* :mod:`timekge.scoring` -- the five fusion variants with hand-derived
  gradients;
* :mod:`timekge.training` -- 1-N loop, Adam, checkpoints;
* :mod:`timekge.evaluation` -- filtered ranking metrics and count exports;
* :mod:`timekge.cli` -- the ``timekge`` command.
"""

from .datasets import (
    Dataset,
    RawQuadruple,
    Vocab,
    augment_reciprocal,
    build_vocab,
    dataset_stats,
    group_targets,
    index_quadruples,
    parse_quadruples,
    resample_time,
    synthetic_dataset_dir,
)
from .evaluation import RankingMetrics, build_filter, evaluate, rank_of
from .gradcheck import GradCheckReport, finite_diff_check
from .kernels import hadamard, matvec_t, sum_pool
from .scoring import (
    Model,
    ModelParams,
    Variant,
    fuse_cfb,
    fuse_ftp,
    fuse_lowfer,
    fuse_t,
    fuse_tnt,
    init_params,
    score_all,
)
from .time_encoding import (
    COMPONENTS,
    CycleIndices,
    CyclicTimeEncoder,
    SimpleTimeEncoder,
    cycle_cardinalities,
    decompose_date,
    encode_cyclic,
    encode_simple,
)
from .training import (
    AdamState,
    TrainConfig,
    Trainer,
    adam_step,
    apply_dropout,
    bce_loss,
    decay_lr,
    load_checkpoint,
    save_checkpoint,
    smooth_targets,
    train_epoch,
)

__version__ = "0.1.0"

__all__ = [
    "AdamState", "COMPONENTS", "CycleIndices", "CyclicTimeEncoder", "Dataset",
    "GradCheckReport", "Model", "ModelParams", "RankingMetrics", "RawQuadruple",
    "SimpleTimeEncoder", "TrainConfig", "Trainer", "Variant", "Vocab",
    "adam_step", "apply_dropout", "augment_reciprocal", "bce_loss",
    "build_filter", "build_vocab", "cycle_cardinalities", "dataset_stats",
    "decay_lr", "decompose_date", "encode_cyclic", "encode_simple", "evaluate",
    "finite_diff_check", "fuse_cfb", "fuse_ftp", "fuse_lowfer", "fuse_t",
    "fuse_tnt", "group_targets", "hadamard", "index_quadruples", "init_params",
    "load_checkpoint", "matvec_t", "parse_quadruples", "rank_of",
    "resample_time", "save_checkpoint", "score_all", "smooth_targets",
    "sum_pool", "synthetic_dataset_dir", "train_epoch",
]
