"""Filtered ranking evaluation and exploratory count exports.

Queries are tail queries over the reciprocal-augmented split, so every
original fact contributes two queries (its own and its reciprocal twin)
and both prediction directions run through the same 1-N scoring path.
The filtered protocol removes every *other* object known true for the
same ``(s, p, t)`` key anywhere in train/valid/test before ranking; the
key includes the timestamp, so a fact that only holds at another time
still competes. Equal scores are ranked with the mean tie policy, which
keeps a constant scorer at the expected middle rank instead of
flattering it.
"""

import csv
from dataclasses import dataclass
import numpy as np

from .datasets import Vocab, group_targets, resample_dates, resample_time
from .errors import DataError

FilterIndex = dict[tuple[int, int, int], np.ndarray]


def build_filter(splits) -> FilterIndex:
    """Union of (s, p, t) -> objects groupings over the given splits."""
    merged = np.concatenate([np.asarray(s).reshape(-1, 4) for s in splits], axis=0) \
        if splits else np.zeros((0, 4), dtype=np.int64)
    return group_targets(merged)


def rank_of(scores: np.ndarray, true_obj: int, filter_out=()) -> float:
    """Rank of ``true_obj`` with competitors in ``filter_out`` removed.

    Mean tie policy: rank = 1 + #{strictly better} + #{ties}/2, counted
    over candidates that survive filtering.
    """
    scores = np.asarray(scores, dtype=np.float64)
    row = scores.copy()
    idx = np.asarray(list(filter_out), dtype=np.int64)
    if idx.size:
        if (idx == true_obj).any():
            raise DataError("filter_out must not contain the true object")
        row[idx] = -np.inf
    s_true = row[true_obj]
    greater = int((row > s_true).sum())
    ties = int((row == s_true).sum()) - 1
    return 1.0 + greater + 0.5 * ties


@dataclass
class DirectionMetrics:
    mrr: float
    hits1: float
    hits3: float
    hits10: float
    num_queries: int

    @classmethod
    def from_ranks(cls, ranks: np.ndarray) -> "DirectionMetrics":
        if ranks.size == 0:
            return cls(0.0, 0.0, 0.0, 0.0, 0)
        return cls(
            mrr=float(np.mean(1.0 / ranks)),
            hits1=float(np.mean(ranks <= 1.0)),
            hits3=float(np.mean(ranks <= 3.0)),
            hits10=float(np.mean(ranks <= 10.0)),
            num_queries=int(ranks.size),
        )

    def to_dict(self) -> dict:
        return {"mrr": self.mrr, "hits1": self.hits1, "hits3": self.hits3,
                "hits10": self.hits10, "num_queries": self.num_queries}


@dataclass
class RankingMetrics:
    """Combined metrics plus per-direction sub-records."""

    mrr: float
    hits1: float
    hits3: float
    hits10: float
    num_queries: int
    tail: DirectionMetrics
    head: DirectionMetrics

    def to_dict(self) -> dict:
        return {
            "mrr": self.mrr, "hits1": self.hits1, "hits3": self.hits3,
            "hits10": self.hits10, "num_queries": self.num_queries,
            "per_direction": {"tail": self.tail.to_dict(),
                              "head": self.head.to_dict()},
        }


def evaluate(model, quads: np.ndarray, flt: FilterIndex | None,
             mode: str = "filtered", batch_size: int = 1024) -> RankingMetrics:
    """Rank the true object of every query in a reciprocal-augmented split.

    Dropout stays off, so evaluation is deterministic. ``tail`` metrics
    cover the original facts, ``head`` their reciprocal twins.
    """
    if mode not in ("filtered", "raw"):
        raise DataError(f"unknown evaluation mode {mode!r}")
    if mode == "filtered" and flt is None:
        raise DataError("filtered evaluation needs a filter index")
    quads = np.asarray(quads, dtype=np.int64).reshape(-1, 4)
    num_relations = model.params.relation.shape[0] // 2
    ranks = np.empty(quads.shape[0])
    for start in range(0, quads.shape[0], batch_size):
        chunk = quads[start:start + batch_size]
        logits, _ = model.forward(chunk[:, 0], chunk[:, 1], chunk[:, 3],
                                  training=False)
        for i, (s, p, o, t) in enumerate(chunk):
            row = logits[i]
            if mode == "filtered":
                known = flt.get((int(s), int(p), int(t)))
                if known is None:
                    raise DataError(
                        f"no filter entry for key ({s}, {p}, {t}); "
                        "the filter must be built from all splits")
                others = known[known != o]
                row = row.copy()
                row[others] = -np.inf
            s_true = row[o]
            greater = int((row > s_true).sum())
            ties = int((row == s_true).sum()) - 1
            ranks[start + i] = 1.0 + greater + 0.5 * ties
    is_head = quads[:, 1] >= num_relations
    tail = DirectionMetrics.from_ranks(ranks[~is_head])
    head = DirectionMetrics.from_ranks(ranks[is_head])
    combined = DirectionMetrics.from_ranks(ranks)
    return RankingMetrics(
        mrr=combined.mrr, hits1=combined.hits1, hits3=combined.hits3,
        hits10=combined.hits10, num_queries=combined.num_queries,
        tail=tail, head=head,
    )


# ---------------------------------------------------------------------------
# count exports
# ---------------------------------------------------------------------------

def relation_time_counts(quads: np.ndarray, num_relations: int,
                         num_timestamps: int) -> np.ndarray:
    """Fact counts per (original relation, timestamp); reciprocals folded."""
    counts = np.zeros((num_relations, num_timestamps), dtype=np.int64)
    for _, p, _, t in np.asarray(quads, dtype=np.int64).reshape(-1, 4):
        counts[p % num_relations, t] += 1
    return counts


def export_time_relation_heatmap(quads: np.ndarray, vocab: Vocab, path,
                                 rate: int = 1) -> np.ndarray:
    """CSV matrix of fact counts per relation and (resampled) timestamp.

    Columns are labelled with the first date each bucket covers; at
    ``rate == 1`` that is just the timestamp's own date.
    """
    resampled, num_t = resample_time(quads, rate, vocab.num_timestamps)
    counts = relation_time_counts(resampled, vocab.num_relations, num_t)
    labels = [d.isoformat() for d in resample_dates(vocab.dates, rate)]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["relation", *labels])
        for r, name in enumerate(vocab.relations):
            writer.writerow([name, *counts[r].tolist()])
    return counts


def export_time_concentration(quads: np.ndarray, vocab: Vocab, path,
                              rate: int = 1) -> np.ndarray:
    """CSV of total fact counts per (resampled) timestamp."""
    resampled, num_t = resample_time(quads, rate, vocab.num_timestamps)
    counts = np.zeros(num_t, dtype=np.int64)
    for t in resampled[:, 3]:
        counts[t] += 1
    labels = [d.isoformat() for d in resample_dates(vocab.dates, rate)]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["date", "count"])
        for label, count in zip(labels, counts.tolist()):
            writer.writerow([label, count])
    return counts
