"""Desk-scale detector: hashed n-gram linear scorer, trainer, evaluator.

The decision function g is a linear model over hashed word/character
n-gram counts (FNV-1a 64-bit, bucketed modulo a power-of-two dimension,
L2-normalized).  Scores above 0 mean "human"; for evaluation the positive
class is machine-generated text, the usual detection convention, with the
threshold fixed at 0 (no test-set threshold scanning).

Training is minibatch gradient descent with momentum on the combined
PN + gamma * multiscale-PU objective, with optional per-epoch sentence
multiscaling (each text is substituted by its augmented version) and an
optional short-text drop that excludes short samples from the backward
pass.  Everything is keyed off one run seed and is bit-reproducible.
"""

from __future__ import annotations

import base64
import json
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .data import Record
from .errors import ConfigError, DataError
from .multiscale import MultiscaleConfig, multiscale_once, record_rng
from .prior import PriorConfig, PriorTable, build_prior_table
from .puloss import LossConfig, loss_gradient, total_loss

_TOKEN_RE = re.compile(r"\w+|[^\w\s]")
_SEED_MASK = 0xFFFFFFFFFFFFFFFF
_SHUFFLE_STREAM = 0x53484641  # disjoint from (epoch, index) augmentation keys

MODEL_FORMAT = "mpu-detect-linear"
MODEL_SCHEMA_VERSION = 1


def tokenize(text: str, lowercase: bool = True) -> list[str]:
    """Whitespace/punctuation tokenizer; punctuation marks stand alone.

    The token count doubles as the length fed to the prior table.
    """
    if not text or not text.strip():
        raise DataError("cannot tokenize empty text")
    if lowercase:
        text = text.lower()
    return _TOKEN_RE.findall(text)


def fnv1a64(data: str) -> int:
    """FNV-1a 64-bit over the UTF-8 bytes; the stated, platform-stable hash."""
    h = 0xCBF29CE484222325
    for byte in data.encode("utf-8"):
        h = ((h ^ byte) * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


@dataclass(frozen=True)
class FeatureConfig:
    word_ngrams: tuple[int, ...] = (1, 2)
    char_ngrams: tuple[int, ...] = (3,)
    hash_dim: int = 1 << 18
    lowercase: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "word_ngrams", tuple(self.word_ngrams))
        object.__setattr__(self, "char_ngrams", tuple(self.char_ngrams))
        if not self.word_ngrams and not self.char_ngrams:
            raise ConfigError("at least one n-gram order must be enabled")
        if any(n < 1 for n in self.word_ngrams + self.char_ngrams):
            raise ConfigError("n-gram orders must be positive")
        if self.hash_dim < 2 or self.hash_dim & (self.hash_dim - 1):
            raise ConfigError(f"hash_dim must be a power of two, got {self.hash_dim}")


class Featurizer:
    """Hashed n-gram extractor with an n-gram -> bucket memo shared per run."""

    def __init__(self, config: FeatureConfig):
        self.config = config
        self._memo: dict[str, int] = {}

    def _bucket(self, key: str) -> int:
        idx = self._memo.get(key)
        if idx is None:
            idx = fnv1a64(key) & (self.config.hash_dim - 1)
            self._memo[key] = idx
        return idx

    def tokenize(self, text: str) -> list[str]:
        return tokenize(text, self.config.lowercase)

    def features(self, text: str) -> tuple[np.ndarray, np.ndarray]:
        """Sparse L2-normalized feature vector as (sorted indices, values)."""
        tokens = self.tokenize(text)
        counts: dict[int, float] = {}
        for order in self.config.word_ngrams:
            for i in range(len(tokens) - order + 1):
                key = f"w{order}:" + " ".join(tokens[i : i + order])
                idx = self._bucket(key)
                counts[idx] = counts.get(idx, 0.0) + 1.0
        if self.config.char_ngrams:
            joined = " ".join(tokens)
            for order in self.config.char_ngrams:
                for i in range(len(joined) - order + 1):
                    idx = self._bucket(f"c{order}:" + joined[i : i + order])
                    counts[idx] = counts.get(idx, 0.0) + 1.0
        if not counts:
            return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.float64)
        indices = np.array(sorted(counts), dtype=np.int64)
        values = np.array([counts[i] for i in indices], dtype=np.float64)
        values /= np.sqrt(values @ values)
        return indices, values


def featurize(tokens: list[str], config: FeatureConfig) -> tuple[np.ndarray, np.ndarray]:
    """One-shot hashed features for an already tokenized text."""
    return Featurizer(config).features(" ".join(tokens))


class LinearModel:
    """Linear scorer g over hashed n-gram features."""

    def __init__(
        self,
        feature_config: FeatureConfig,
        weights: np.ndarray | None = None,
        bias: float = 0.0,
        train_config_hash: str | None = None,
    ):
        self.feature_config = feature_config
        self.featurizer = Featurizer(feature_config)
        if weights is None:
            weights = np.zeros(feature_config.hash_dim, dtype=np.float64)
        weights = np.asarray(weights, dtype=np.float64)
        if weights.shape != (feature_config.hash_dim,):
            raise ConfigError(
                f"weight vector must have dimension {feature_config.hash_dim}"
            )
        self.weights = weights
        self.bias = float(bias)
        self.train_config_hash = train_config_hash

    def score(self, text: str) -> float:
        indices, values = self.featurizer.features(text)
        return self.score_features(indices, values)

    def score_features(self, indices: np.ndarray, values: np.ndarray) -> float:
        if indices.size == 0:
            return self.bias
        return float(self.weights[indices] @ values + self.bias)

    def save(self, path: str | Path) -> None:
        payload = self.to_dict()
        Path(path).write_text(json.dumps(payload, sort_keys=True), encoding="utf-8")

    def to_dict(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "schema_version": MODEL_SCHEMA_VERSION,
            "feature_config": {
                "word_ngrams": list(self.feature_config.word_ngrams),
                "char_ngrams": list(self.feature_config.char_ngrams),
                "hash_dim": self.feature_config.hash_dim,
                "lowercase": self.feature_config.lowercase,
            },
            "bias": self.bias,
            "weights_b64": base64.b64encode(
                self.weights.astype("<f8").tobytes()
            ).decode("ascii"),
            "train_config_hash": self.train_config_hash,
        }

    @classmethod
    def load(cls, path: str | Path) -> "LinearModel":
        try:
            payload = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise DataError(f"cannot read model file {path}: {exc}") from exc
        if payload.get("format") != MODEL_FORMAT:
            raise DataError(f"{path} is not a {MODEL_FORMAT} file")
        if payload.get("schema_version") != MODEL_SCHEMA_VERSION:
            raise DataError(
                f"unsupported model schema version {payload.get('schema_version')}"
            )
        fc = payload["feature_config"]
        config = FeatureConfig(
            word_ngrams=tuple(fc["word_ngrams"]),
            char_ngrams=tuple(fc["char_ngrams"]),
            hash_dim=fc["hash_dim"],
            lowercase=fc["lowercase"],
        )
        weights = np.frombuffer(
            base64.b64decode(payload["weights_b64"]), dtype="<f8"
        ).astype(np.float64)
        return cls(
            config,
            weights=weights,
            bias=payload["bias"],
            train_config_hash=payload.get("train_config_hash"),
        )


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 5
    batch_size: int = 64
    learning_rate: float = 0.5
    momentum: float = 0.9
    l2: float = 0.0
    seed: int = 0
    loss: LossConfig = field(default_factory=LossConfig)
    multiscale: MultiscaleConfig | None = field(default_factory=MultiscaleConfig)
    prior: PriorConfig = field(default_factory=lambda: PriorConfig(p=0.2, l_max=512))
    features: FeatureConfig = field(default_factory=FeatureConfig)
    drop_short_below: int | None = None

    def __post_init__(self) -> None:
        if self.epochs < 1 or self.batch_size < 1 or self.learning_rate <= 0:
            raise ConfigError("epochs, batch size, and learning rate must be positive")
        if not 0.0 <= self.momentum < 1.0:
            raise ConfigError(f"momentum must be in [0, 1), got {self.momentum}")
        if self.l2 < 0:
            raise ConfigError("l2 penalty must be nonnegative")
        if self.drop_short_below is not None and self.drop_short_below < 1:
            raise ConfigError("drop_short_below must be a positive token length")


def _label_value(record: Record) -> int:
    return 1 if record.label == "human" else -1


def train(
    corpus: list[Record],
    config: TrainConfig,
    dev: list[Record] | None = None,
) -> tuple[LinearModel, list[dict]]:
    """Train the linear detector; returns the model and per-epoch history.

    Per epoch: (1) optionally substitute every text by one multiscaling
    pass keyed by (seed, epoch, sample index); (2) optionally exclude
    samples shorter than drop_short_below tokens from the backward pass;
    (3) shuffle; (4) minibatch momentum-SGD on the combined loss, priors
    looked up at each positive sample's current token length.  Minibatches
    that end up single-class contribute their PN term only (the PU
    estimators are undefined there); with sensible batch sizes this is
    vanishingly rare.  Bit-reproducible for a fixed (corpus, config).
    """
    labels_all = np.array([_label_value(r) for r in corpus], dtype=np.int64)
    if not ((labels_all == 1).any() and (labels_all == -1).any()):
        raise ConfigError("training corpus must contain both human and ai samples")

    featurizer = Featurizer(config.features)
    table = build_prior_table(config.prior) if config.loss.gamma > 0 else None
    dim = config.features.hash_dim
    weights = np.zeros(dim, dtype=np.float64)
    bias = 0.0
    velocity = np.zeros(dim, dtype=np.float64)
    velocity_bias = 0.0
    seed = config.seed & _SEED_MASK
    pn_only = LossConfig(gamma=0.0, surrogate=config.loss.surrogate)
    history: list[dict] = []

    base_texts = [r.text for r in corpus]
    static_corpus = config.multiscale is None
    if static_corpus:
        static_lengths = np.array(
            [len(featurizer.tokenize(t)) for t in base_texts], dtype=np.int64
        )
        static_feats = [featurizer.features(t) for t in base_texts]
    for epoch in range(config.epochs):
        if static_corpus:
            texts, lengths, feats = base_texts, static_lengths, static_feats
        else:
            texts = [
                multiscale_once(
                    text,
                    config.multiscale.p_sent,
                    record_rng(config.multiscale.seed, epoch, i),
                )
                for i, text in enumerate(base_texts)
            ]
            lengths = np.array(
                [len(featurizer.tokenize(t)) for t in texts], dtype=np.int64
            )
            feats = [featurizer.features(t) for t in texts]
        active = np.arange(len(corpus))
        if config.drop_short_below is not None:
            active = active[lengths[active] >= config.drop_short_below]
            if active.size == 0:
                raise ConfigError(
                    f"drop_short_below={config.drop_short_below} excludes every sample"
                )

        shuffle_rng = np.random.default_rng([seed, _SHUFFLE_STREAM, epoch])
        order = active[shuffle_rng.permutation(active.size)]
        batch_losses = []
        for start in range(0, order.size, config.batch_size):
            batch_idx = order[start : start + config.batch_size]
            batch_feats = [feats[i] for i in batch_idx]
            scores = np.array(
                [
                    weights[fi] @ fv + bias if fi.size else bias
                    for fi, fv in batch_feats
                ]
            )
            batch_labels = labels_all[batch_idx]
            batch_lengths = lengths[batch_idx]
            single_class = (batch_labels == 1).all() or (batch_labels == -1).all()
            loss_config = pn_only if single_class else config.loss
            value = total_loss(
                scores, batch_labels, loss_config, lengths=batch_lengths, table=table
            )
            grad_scores = loss_gradient(
                scores, batch_labels, loss_config, lengths=batch_lengths, table=table
            )
            batch_losses.append(value)

            flat_idx = np.concatenate([fi for fi, _ in batch_feats])
            flat_vals = np.concatenate(
                [fv * g for (_, fv), g in zip(batch_feats, grad_scores)]
            )
            grad_w = np.bincount(flat_idx, weights=flat_vals, minlength=dim)
            if config.l2 > 0:
                grad_w += config.l2 * weights
            grad_b = float(grad_scores.sum())
            velocity *= config.momentum
            velocity -= config.learning_rate * grad_w
            velocity_bias = (
                config.momentum * velocity_bias - config.learning_rate * grad_b
            )
            weights += velocity
            bias += velocity_bias

        entry = {"epoch": epoch, "train_loss": float(np.mean(batch_losses))}
        if dev is not None:
            snapshot = LinearModel(config.features, weights.copy(), bias)
            entry["dev_f1"] = evaluate(snapshot, dev).f1
        history.append(entry)

    model = LinearModel(config.features, weights, bias)
    return model, history


@dataclass(frozen=True)
class BucketReport:
    lo: int
    hi: float
    count: int
    tp: int
    fp: int
    fn: int
    tn: int
    precision: float
    recall: float
    f1: float
    accuracy: float


@dataclass(frozen=True)
class EvalReport:
    tp: int
    fp: int
    fn: int
    tn: int
    precision: float
    recall: float
    f1: float
    accuracy: float
    buckets: tuple[BucketReport, ...] = ()

    def to_dict(self) -> dict:
        return {
            "f1": self.f1,
            "precision": self.precision,
            "recall": self.recall,
            "accuracy": self.accuracy,
            "confusion": {"tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn},
            "buckets": [
                {
                    "lo": b.lo,
                    "hi": None if b.hi == float("inf") else int(b.hi),
                    "count": b.count,
                    "f1": b.f1,
                    "precision": b.precision,
                    "recall": b.recall,
                    "accuracy": b.accuracy,
                    "confusion": {
                        "tp": b.tp,
                        "fp": b.fp,
                        "fn": b.fn,
                        "tn": b.tn,
                    },
                }
                for b in self.buckets
            ],
        }


def _metrics(tp: int, fp: int, fn: int, tn: int) -> tuple[float, float, float, float]:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    total = tp + fp + fn + tn
    accuracy = (tp + tn) / total if total else 0.0
    return precision, recall, f1, accuracy


def evaluate(
    model: LinearModel,
    corpus: list[Record],
    length_buckets: list[tuple[int, float]] | None = None,
) -> EvalReport:
    """Score a corpus; machine-generated is the positive class, threshold 0."""
    if not corpus:
        raise DataError("cannot evaluate an empty corpus")
    counts = np.zeros(4, dtype=np.int64)  # tp, fp, fn, tn
    buckets = [(lo, hi, np.zeros(4, dtype=np.int64)) for lo, hi in length_buckets or []]
    for record in corpus:
        length = len(model.featurizer.tokenize(record.text))
        predicted_machine = model.score(record.text) <= 0.0
        actual_machine = record.label == "ai"
        slot = (
            0
            if predicted_machine and actual_machine
            else 1
            if predicted_machine
            else 2
            if actual_machine
            else 3
        )
        counts[slot] += 1
        for lo, hi, bucket_counts in buckets:
            if lo <= length < hi:
                bucket_counts[slot] += 1
    precision, recall, f1, accuracy = _metrics(*counts)
    bucket_reports = []
    for lo, hi, bucket_counts in buckets:
        b_precision, b_recall, b_f1, b_accuracy = _metrics(*bucket_counts)
        bucket_reports.append(
            BucketReport(
                lo=lo,
                hi=float(hi),
                count=int(bucket_counts.sum()),
                tp=int(bucket_counts[0]),
                fp=int(bucket_counts[1]),
                fn=int(bucket_counts[2]),
                tn=int(bucket_counts[3]),
                precision=b_precision,
                recall=b_recall,
                f1=b_f1,
                accuracy=b_accuracy,
            )
        )
    return EvalReport(
        tp=int(counts[0]),
        fp=int(counts[1]),
        fn=int(counts[2]),
        tn=int(counts[3]),
        precision=precision,
        recall=recall,
        f1=f1,
        accuracy=accuracy,
        buckets=tuple(bucket_reports),
    )
