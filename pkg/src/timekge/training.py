"""1-N training: smoothed binary cross-entropy over all candidate objects,
Adam with per-epoch exponential learning-rate decay, checkpointing.

A training row is one distinct ``(s, p, t)`` key from the
reciprocal-augmented train split; its target vector marks every object
observed with that key in train (never valid/test, which would leak into
evaluation). Runs are reproducible: one seeded PCG64 generator drives
initialization, shuffling and dropout in a fixed consumption order.
"""

import dataclasses
import json
import logging
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import evaluation
from .datasets import Dataset, augment_reciprocal, group_targets, resample_dates, resample_time
from .errors import (
    CheckpointCorruptError,
    CheckpointShapeError,
    CheckpointVocabError,
    ConfigError,
    NumericError,
)
from .scoring import Model, ModelParams, Variant, init_params
from .time_encoding import CyclicTimeEncoder, SimpleTimeEncoder

logger = logging.getLogger(__name__)

RNG_ALGORITHM = "numpy-pcg64"
CHECKPOINT_FORMAT = "timekge-checkpoint-v1"


# ---------------------------------------------------------------------------
# loss pieces
# ---------------------------------------------------------------------------

def smooth_targets(true_objects, num_entities: int, smoothing: float) -> np.ndarray:
    """Label-smoothed 0/1 target vector over all candidate objects."""
    objs = np.asarray(list(true_objects) if isinstance(true_objects, set) else true_objects,
                      dtype=np.int64).reshape(-1)
    if objs.size == 0:
        raise ConfigError("smooth_targets: empty true-object set (malformed grouping)")
    if not 0.0 <= smoothing < 1.0:
        raise ConfigError(f"label smoothing must be in [0, 1), got {smoothing}")
    y = np.full(num_entities, smoothing / num_entities)
    y[objs] += 1.0 - smoothing
    return y


def _sigmoid(x: np.ndarray) -> np.ndarray:
    z = np.exp(-np.abs(x))
    return np.where(x >= 0, 1.0 / (1.0 + z), z / (1.0 + z))


def _softplus(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))


def bce_loss(logits: np.ndarray, targets: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean binary cross-entropy over candidates, in overflow-safe form.

    Accepts one logits vector or a batch of them; the loss averages over
    every element. Returns the loss and its gradient w.r.t. the logits.
    """
    x = np.asarray(logits, dtype=np.float64)
    y = np.asarray(targets, dtype=np.float64)
    if x.shape != y.shape:
        raise ConfigError(f"logits shape {x.shape} != targets shape {y.shape}")
    if not np.isfinite(x).all():
        raise NumericError("non-finite logits in bce_loss")
    # -[y log s(x) + (1-y) log(1-s(x))] == y*softplus(-x) + (1-y)*softplus(x)
    loss = float(np.mean(y * _softplus(-x) + (1.0 - y) * _softplus(x)))
    grad = (_sigmoid(x) - y) / x.size
    return loss, grad


def apply_dropout(x, rate: float, rng: np.random.Generator | None = None,
                  training: bool = True) -> np.ndarray:
    """Inverted dropout: zero with probability ``rate``, scale survivors.

    Identity when ``training`` is false or the rate is zero.
    """
    arr = np.asarray(x, dtype=np.float64)
    if not training or rate == 0.0:
        return arr.copy()
    if not 0.0 <= rate < 1.0:
        raise ConfigError(f"dropout rate must be in [0, 1), got {rate}")
    if rng is None:
        raise ConfigError("training-mode dropout needs a random generator")
    mask = rng.random(arr.shape) >= rate
    return arr * mask / (1.0 - rate)


# ---------------------------------------------------------------------------
# optimizer
# ---------------------------------------------------------------------------

@dataclass
class AdamState:
    """First/second moment estimates per tensor plus the shared step count."""

    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, tensors: dict[str, np.ndarray], beta1: float = 0.9,
                   beta2: float = 0.999, eps: float = 1e-8) -> "AdamState":
        return cls(
            m={k: np.zeros_like(t) for k, t in tensors.items()},
            v={k: np.zeros_like(t) for k, t in tensors.items()},
            beta1=beta1, beta2=beta2, eps=eps,
        )


def adam_step(tensors: dict[str, np.ndarray], grads: dict[str, np.ndarray],
              state: AdamState, lr: float) -> None:
    """One in-place Adam update with bias correction."""
    state.step += 1
    bc1 = 1.0 - state.beta1 ** state.step
    bc2 = 1.0 - state.beta2 ** state.step
    for name, theta in tensors.items():
        g = grads[name]
        if g.shape != theta.shape:
            raise ConfigError(f"gradient shape mismatch for {name!r}")
        m = state.m[name]
        v = state.v[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        theta -= lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)


def decay_lr(base_lr: float, decay: float, epoch: int) -> float:
    """Exponential schedule, applied once per epoch."""
    if epoch < 0:
        raise ConfigError(f"epoch must be >= 0, got {epoch}")
    return base_lr * decay ** epoch


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

@dataclass
class TrainConfig:
    variant: str = "tnt"
    encoder: str = "ste"
    dim_entity: int = 300
    dim_relation: int | None = None
    dim_time: int | None = None
    rank: int = 32
    lr: float = 0.01
    decay: float = 0.99
    batch_size: int = 1000
    label_smoothing: float = 0.01
    dropout_input: float = 0.1
    dropout_hidden: float = 0.2
    epochs: int = 50
    seed: int = 0
    time_sampling_rate: int = 1

    def validate(self) -> None:
        Variant.from_string(self.variant)
        if self.encoder not in ("ste", "cte"):
            raise ConfigError(f"unknown encoder {self.encoder!r} (expected 'ste' or 'cte')")
        if self.dim_entity < 1 or self.rank < 1 or self.batch_size < 1:
            raise ConfigError("dims, rank and batch size must be positive")
        if self.epochs < 0:
            raise ConfigError("epochs must be >= 0")
        if not 0.0 <= self.label_smoothing < 1.0:
            raise ConfigError("label smoothing must be in [0, 1)")
        for rate in (self.dropout_input, self.dropout_hidden):
            if not 0.0 <= rate < 1.0:
                raise ConfigError("dropout rates must be in [0, 1)")
        if self.time_sampling_rate < 1:
            raise ConfigError("time sampling rate must be >= 1")


@dataclass
class EpochRecord:
    epoch: int
    loss: float
    lr: float
    seconds: float
    val: dict | None = None

    def to_json(self) -> dict:
        out = {"epoch": self.epoch, "loss": self.loss, "lr": self.lr,
               "seconds": self.seconds}
        if self.val is not None:
            out["val"] = self.val
        return out


# ---------------------------------------------------------------------------
# epoch loop
# ---------------------------------------------------------------------------

def train_epoch(model: Model, keys: np.ndarray,
                targets: dict[tuple[int, int, int], np.ndarray],
                config: TrainConfig, adam: AdamState,
                rng: np.random.Generator, lr: float, epoch: int = 0) -> float:
    """One pass over shuffled 1-N keys; returns the mean per-key loss."""
    num_entities = model.params.num_entities
    order = rng.permutation(keys.shape[0])
    tensors = model.params.tensors()
    total = 0.0
    for start in range(0, keys.shape[0], config.batch_size):
        batch = keys[order[start:start + config.batch_size]]
        y = np.full((batch.shape[0], num_entities),
                    config.label_smoothing / num_entities)
        for i, (s, p, t) in enumerate(batch):
            y[i, targets[(int(s), int(p), int(t))]] += 1.0 - config.label_smoothing
        logits, cache = model.forward(
            batch[:, 0], batch[:, 1], batch[:, 2], training=True,
            dropout_input=config.dropout_input,
            dropout_hidden=config.dropout_hidden, rng=rng,
        )
        try:
            loss, dlogits = bce_loss(logits, y)
        except NumericError as exc:
            raise NumericError(
                f"epoch {epoch}, batch {start // config.batch_size}: {exc}"
            ) from None
        grads = model.backward(cache, dlogits)
        adam_step(tensors, grads, adam, lr)
        total += loss * batch.shape[0]
    return total / keys.shape[0]


class Trainer:
    """Wires a dataset and a config into a reproducible training run."""

    def __init__(self, dataset: Dataset, config: TrainConfig):
        config.validate()
        self.config = config
        self.vocab = dataset.vocab
        rate = config.time_sampling_rate
        num_t = self.vocab.num_timestamps
        self.train_quads, self.num_timestamps = resample_time(
            augment_reciprocal(dataset.train, self.vocab.num_relations), rate, num_t)
        self.valid_quads, _ = resample_time(
            augment_reciprocal(dataset.valid, self.vocab.num_relations), rate, num_t)
        self.test_quads, _ = resample_time(
            augment_reciprocal(dataset.test, self.vocab.num_relations), rate, num_t)
        self.dates = resample_dates(self.vocab.dates, rate)

        self.targets = group_targets(self.train_quads)
        self.keys = np.array(sorted(self.targets), dtype=np.int64).reshape(-1, 3)
        self.filter = evaluation.build_filter(
            [self.train_quads, self.valid_quads, self.test_quads])

        seq = np.random.SeedSequence(config.seed)
        init_seq, train_seq = seq.spawn(2)
        params = init_params(
            config.variant,
            num_entities=self.vocab.num_entities,
            num_relations=self.vocab.num_relations,
            rank=config.rank,
            dim_entity=config.dim_entity,
            dim_relation=config.dim_relation,
            dim_time=config.dim_time,
            encoder=config.encoder,
            num_timestamps=self.num_timestamps,
            dates=self.dates,
            rng=np.random.default_rng(init_seq),
        )
        self.model = Model(params)
        self.rng = np.random.default_rng(train_seq)
        self.adam = AdamState.for_params(params.tensors())
        self.history: list[EpochRecord] = []

    def evaluate_split(self, split: str, mode: str = "filtered"):
        quads = {"train": self.train_quads, "valid": self.valid_quads,
                 "test": self.test_quads}[split]
        return evaluation.evaluate(self.model, quads, self.filter, mode=mode)

    def run(self, eval_interval: int = 0, on_epoch=None) -> list[EpochRecord]:
        """Train for the configured number of epochs.

        ``eval_interval > 0`` computes filtered validation metrics every
        that many epochs (and on the final one). ``on_epoch`` is called
        with each finished :class:`EpochRecord`.
        """
        for epoch in range(self.config.epochs):
            started = time.perf_counter()
            lr = decay_lr(self.config.lr, self.config.decay, epoch)
            loss = train_epoch(self.model, self.keys, self.targets,
                               self.config, self.adam, self.rng, lr, epoch)
            record = EpochRecord(epoch=epoch, loss=loss, lr=lr,
                                 seconds=time.perf_counter() - started)
            if eval_interval > 0 and (
                    (epoch + 1) % eval_interval == 0 or epoch == self.config.epochs - 1):
                record.val = self.evaluate_split("valid").to_dict()
            self.history.append(record)
            logger.info("epoch %d: loss=%.6f lr=%.6g", epoch, loss, lr)
            if on_epoch is not None:
                on_epoch(record)
        return self.history


# ---------------------------------------------------------------------------
# checkpoints
# ---------------------------------------------------------------------------

def save_checkpoint(directory, params: ModelParams, *, vocab_hashes: dict,
                    epoch: int, seed: int, time_sampling_rate: int = 1,
                    num_timestamps: int | None = None,
                    config: dict | None = None) -> None:
    """Write a manifest plus one raw little-endian float64 file per tensor."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    tensors = params.tensors()
    manifest = {
        "format": CHECKPOINT_FORMAT,
        "variant": params.variant.value,
        "rank": params.rank,
        "encoder": params.encoder.kind if params.encoder is not None else None,
        "dims": {
            "entity": params.dim_entity,
            "relation": params.dim_relation,
            "time": params.dim_time,
        },
        "num_entities": params.num_entities,
        "num_relations": params.relation.shape[0] // 2,
        "num_timestamps": num_timestamps,
        "tensors": {name: list(t.shape) for name, t in tensors.items()},
        "vocab_hashes": vocab_hashes,
        "epoch": epoch,
        "seed": seed,
        "rng": RNG_ALGORITHM,
        "time_sampling_rate": time_sampling_rate,
    }
    if config is not None:
        manifest["config"] = config
    with open(directory / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    for name, tensor in tensors.items():
        with open(directory / f"{name}.bin", "wb") as fh:
            fh.write(np.ascontiguousarray(tensor, dtype="<f8").tobytes())


def _expected_layout(manifest: dict) -> dict[str, tuple[int, ...]]:
    """Tensor shapes implied by the manifest's model description."""
    variant = Variant.from_string(manifest["variant"])
    rank = int(manifest["rank"])
    dims = manifest["dims"]
    n_ent = int(manifest["num_entities"])
    n_rel = int(manifest["num_relations"])
    d_e, d_r = int(dims["entity"]), int(dims["relation"])
    width = rank * d_e
    layout = {
        "entity": (n_ent, d_e),
        "relation": (2 * n_rel, d_r),
        "subject_proj": (d_e, width),
        "relation_proj": (d_r, width),
    }
    if variant is Variant.TNT:
        layout["relation_static"] = (2 * n_rel, d_r)
    if variant in (Variant.CFB, Variant.FTP):
        layout["time_proj"] = (int(dims["time"]), width)
    if variant is Variant.CFB:
        layout["chain_proj"] = (width, width)
    if variant.uses_time:
        d_t = int(dims["time"])
        if manifest["encoder"] == "ste":
            layout["time"] = (int(manifest["num_timestamps"]), d_t)
        else:
            from .time_encoding import COMPONENTS, cycle_cardinalities
            cards = cycle_cardinalities()
            for comp in COMPONENTS:
                layout[f"time_{comp}"] = (cards[comp], d_t)
    return layout


def load_checkpoint(directory, dataset: Dataset) -> tuple[ModelParams, dict]:
    """Restore parameters saved by :func:`save_checkpoint`.

    The dataset is required both to verify that the checkpoint was
    trained on the same vocabularies and to rebuild the cyclic encoder's
    per-timestamp decomposition cache.
    """
    directory = Path(directory)
    manifest_path = directory / "manifest.json"
    try:
        with open(manifest_path, encoding="utf-8") as fh:
            manifest = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CheckpointCorruptError(f"cannot read {manifest_path}: {exc}") from None
    for key in ("format", "variant", "rank", "dims", "tensors", "vocab_hashes"):
        if key not in manifest:
            raise CheckpointCorruptError(f"manifest missing field {key!r}")
    if manifest["format"] != CHECKPOINT_FORMAT:
        raise CheckpointCorruptError(f"unsupported checkpoint format {manifest['format']!r}")

    hashes = dataset.vocab.hashes()
    if manifest["vocab_hashes"] != hashes:
        raise CheckpointVocabError(
            "checkpoint vocabulary hashes do not match this dataset")

    layout = _expected_layout(manifest)
    recorded = {name: tuple(shape) for name, shape in manifest["tensors"].items()}
    if recorded != layout:
        raise CheckpointShapeError(
            f"tensor layout {recorded} does not match the declared model {layout}")

    tensors = {}
    for name, shape in layout.items():
        path = directory / f"{name}.bin"
        try:
            raw = path.read_bytes()
        except OSError as exc:
            raise CheckpointCorruptError(f"cannot read {path}: {exc}") from None
        count = int(np.prod(shape))
        if len(raw) != count * 8:
            raise CheckpointShapeError(
                f"{path.name}: expected {count * 8} bytes for shape {shape}, "
                f"got {len(raw)}")
        tensors[name] = np.frombuffer(raw, dtype="<f8").astype(np.float64).reshape(shape)

    variant = Variant.from_string(manifest["variant"])
    rate = int(manifest.get("time_sampling_rate", 1))
    encoder = None
    if variant.uses_time:
        if manifest["encoder"] == "ste":
            encoder = SimpleTimeEncoder(tensors["time"])
        else:
            from .time_encoding import COMPONENTS, component_rows_for
            dates = resample_dates(dataset.vocab.dates, rate)
            encoder = CyclicTimeEncoder(
                {c: tensors[f"time_{c}"] for c in COMPONENTS},
                component_rows_for(dates))
    params = ModelParams(
        variant=variant,
        rank=int(manifest["rank"]),
        entity=tensors["entity"],
        relation=tensors["relation"],
        subject_proj=tensors["subject_proj"],
        relation_proj=tensors["relation_proj"],
        relation_static=tensors.get("relation_static"),
        time_proj=tensors.get("time_proj"),
        chain_proj=tensors.get("chain_proj"),
        encoder=encoder,
    )
    return params, manifest
