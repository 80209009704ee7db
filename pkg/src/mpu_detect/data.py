"""Corpus ingestion, space cleaning, deterministic splits, synthetic corpora.

The JSONL wire format is UTF-8, one object per line, keys `text` and
`label` (values "human" or "ai", optional "id").  Human corpora scraped
from the web often carry a space before closing punctuation that
machine-generated text never has; `clean_spaces` strips exactly that
artifact so a detector cannot key on it.

The synthetic generator builds a desk-scale human/AI corpus in which the
only reliable human signal is a small set of "signal" tokens injected with
probability q per position.  AI texts never contain them, so short AI
texts and signal-free short human texts are distribution-identical, which
reproduces the partial-unlabeled structure of short-text detection.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError

LABELS = ("human", "ai")

# Whitespace runs directly before closing punctuation; opening brackets and
# quotes are deliberately left alone.
CLEANABLE_PUNCTUATION = ".,!?;:'\")"

_SEED_MASK = 0xFFFFFFFFFFFFFFFF


@dataclass(frozen=True)
class Record:
    """One corpus entry: text plus binary origin label."""

    text: str
    label: str
    id: str | None = None

    def __post_init__(self) -> None:
        if self.label not in LABELS:
            raise DataError(f"unknown label {self.label!r}, expected one of {LABELS}")
        if not self.text or not self.text.strip():
            raise DataError("empty text")


def load_jsonl(path: str | Path) -> tuple[list[Record], list[str]]:
    """Read a JSONL corpus; returns (records, per-line error messages).

    Malformed lines are collected with their line numbers rather than
    aborting the load.  Raises DataError if the file is unreadable or if
    every line fails.
    """
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc}") from exc
    records: list[Record] = []
    errors: list[str] = []
    for lineno, line in enumerate(raw.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            errors.append(f"line {lineno}: invalid JSON ({exc.msg})")
            continue
        if not isinstance(obj, dict) or "text" not in obj or "label" not in obj:
            errors.append(f"line {lineno}: missing key 'text' or 'label'")
            continue
        try:
            records.append(
                Record(text=obj["text"], label=obj["label"], id=obj.get("id"))
            )
        except DataError as exc:
            errors.append(f"line {lineno}: {exc}")
    if not records:
        raise DataError(
            f"{path}: no valid records"
            + (f" ({len(errors)} malformed lines)" if errors else " (empty file)")
        )
    return records, errors


def write_jsonl(records: list[Record], path: str | Path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for record in records:
            obj = {"text": record.text, "label": record.label}
            if record.id is not None:
                obj["id"] = record.id
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")


def _cleaner_re(punctuation: str) -> re.Pattern[str]:
    return re.compile(r"\s+(?=[" + re.escape(punctuation) + r"])")


_DEFAULT_CLEANER = _cleaner_re(CLEANABLE_PUNCTUATION)


def clean_spaces(text: str, punctuation: str = CLEANABLE_PUNCTUATION) -> str:
    """Delete whitespace immediately preceding closing punctuation.

    Idempotent; never alters the non-whitespace character sequence.
    """
    pattern = (
        _DEFAULT_CLEANER if punctuation == CLEANABLE_PUNCTUATION else _cleaner_re(punctuation)
    )
    return pattern.sub("", text)


def _largest_remainder(total: int, fractions: tuple[float, ...]) -> list[int]:
    exact = [total * f for f in fractions]
    counts = [int(x) for x in exact]
    remainders = sorted(
        range(len(fractions)), key=lambda i: (exact[i] - counts[i], -i), reverse=True
    )
    for i in remainders[: total - sum(counts)]:
        counts[i] += 1
    return counts


def split(
    records: list[Record], fractions: tuple[float, ...], seed: int
) -> tuple[list[Record], ...]:
    """Deterministic stratified-by-label shuffle split; disjoint and exhaustive."""
    if any(f <= 0 for f in fractions):
        raise ConfigError(f"split fractions must be positive, got {fractions}")
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ConfigError(f"split fractions must sum to 1, got {sum(fractions)}")
    if len(records) < len(fractions):
        raise ConfigError(
            f"{len(records)} records cannot fill {len(fractions)} splits"
        )
    n_splits = len(fractions)
    targets = _largest_remainder(len(records), tuple(fractions))
    rng = np.random.default_rng(seed & _SEED_MASK)
    groups: dict[str, list[Record]] = {}
    for label in LABELS:
        group = [r for r in records if r.label == label]
        if group:
            order = rng.permutation(len(group))
            groups[label] = [group[j] for j in order]
    quotas = {
        label: [len(group) * f for f in fractions] for label, group in groups.items()
    }
    allocs = {
        label: _largest_remainder(len(group), tuple(fractions))
        for label, group in groups.items()
    }
    # Per-group rounding can leave column totals off the global targets by a
    # unit or two; move single records between splits, preferring the group
    # whose rounding was most generous in the oversubscribed split.
    totals = [sum(allocs[label][i] for label in allocs) for i in range(n_splits)]
    while totals != targets:
        s_over = next(i for i in range(n_splits) if totals[i] > targets[i])
        s_under = next(i for i in range(n_splits) if totals[i] < targets[i])
        # A column above its target always holds some group above its quota
        # floor; prefer one that is also below its ceiling at the receiving
        # column so every cell stays within one record of its exact quota.
        donor = max(
            (label for label in allocs if allocs[label][s_over] > 0),
            key=lambda label: (
                allocs[label][s_over] > int(quotas[label][s_over]),
                allocs[label][s_under] < -int(-quotas[label][s_under]),
                allocs[label][s_over] - quotas[label][s_over],
                quotas[label][s_under] - allocs[label][s_under],
                label,
            ),
        )
        allocs[donor][s_over] -= 1
        allocs[donor][s_under] += 1
        totals[s_over] -= 1
        totals[s_under] += 1
    splits: tuple[list[Record], ...] = tuple([] for _ in fractions)
    for label, group in groups.items():
        start = 0
        for i, count in enumerate(allocs[label]):
            splits[i].extend(group[start : start + count])
            start += count
    return splits


@dataclass(frozen=True)
class SynthConfig:
    """Synthetic benchmark parameters.

    Human texts draw from the non-signal vocabulary and independently inject
    a signal token with probability signal_q per position; AI texts draw
    from the non-signal vocabulary only.  Lengths come from a short/long
    band mixture; sentence breaks land every 8..16 tokens.
    """

    vocab_size: int = 5000
    signal_tokens: int = 50
    signal_q: float = 0.2
    short_band: tuple[int, int] = (4, 24)
    long_band: tuple[int, int] = (64, 256)
    short_weight: float = 0.5
    n_per_class: int = 10_000
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0 < self.signal_tokens < self.vocab_size:
            raise ConfigError("need 0 < signal_tokens < vocab_size")
        if not 0.0 < self.signal_q < 1.0:
            raise ConfigError(f"signal_q must be in (0, 1), got {self.signal_q}")
        if not 0.0 <= self.short_weight <= 1.0:
            raise ConfigError("short_weight must be in [0, 1]")
        for lo, hi in (self.short_band, self.long_band):
            if not 1 <= lo <= hi:
                raise ConfigError(f"bad length band ({lo}, {hi})")
        if self.n_per_class < 1:
            raise ConfigError("n_per_class must be positive")


def _draw_length(config: SynthConfig, rng: np.random.Generator) -> int:
    band = config.short_band if rng.random() < config.short_weight else config.long_band
    lo, hi = band
    return lo + int(rng.random() * (hi - lo + 1))


def _render_text(token_ids: np.ndarray, rng: np.random.Generator) -> str:
    """Join tokens into sentences of 8..16 tokens, period attached to the last."""
    words = [f"t{i}" for i in token_ids]
    sentences = []
    pos = 0
    while pos < len(words):
        step = 8 + int(rng.random() * 9)
        sentences.append(" ".join(words[pos : pos + step]) + ".")
        pos += step
    return " ".join(sentences)


def synth_generate(config: SynthConfig, stream: int = 0) -> list[Record]:
    """Generate one synthetic corpus; byte-identical for a fixed (config, stream).

    `stream` separates draws for sibling corpora (train/test splits) built
    from the same config.
    """
    rng = np.random.default_rng([config.seed & _SEED_MASK, stream])
    n_signal = config.signal_tokens
    n_other = config.vocab_size - n_signal
    records: list[Record] = []
    for label, tag in (("human", "h"), ("ai", "a")):
        for i in range(config.n_per_class):
            length = _draw_length(config, rng)
            base = n_signal + np.floor(rng.random(length) * n_other).astype(np.int64)
            if label == "human":
                inject = rng.random(length) < config.signal_q
                signal_ids = np.floor(rng.random(length) * n_signal).astype(np.int64)
                token_ids = np.where(inject, signal_ids, base)
            else:
                token_ids = base
            records.append(
                Record(
                    text=_render_text(token_ids, rng),
                    label=label,
                    id=f"{tag}{i:06d}",
                )
            )
    return records


def synth_benchmark(
    config: SynthConfig, n_test_per_class: int = 2000
) -> tuple[list[Record], list[Record], list[Record]]:
    """(train, test-short, test-long) triple from disjoint random streams."""
    test_base = replace(config, n_per_class=n_test_per_class)
    return (
        synth_generate(config, stream=0),
        synth_generate(replace(test_base, short_weight=1.0), stream=1),
        synth_generate(replace(test_base, short_weight=0.0), stream=2),
    )
