"""Sentence-scale text augmentation: split, Bernoulli mask, remerge.

Each training text is cut into sentences, every sentence is independently
kept with probability 1 - p_sent, and the kept sentences are rejoined in
their original order.  The output substitutes the original sample and
inherits its label.  An all-discarded draw keeps one uniformly random
sentence instead, so the output is never empty.

Splitting is deliberately simple and deterministic: a sentence ends at a
terminal punctuation mark followed by whitespace or end of text.  The rule
is abbreviation-naive by design ("Mr. Smith" splits after "Mr.").
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError

SENTENCE_TERMINATORS = ".!?…。！？"  # . ! ? ... CJK stop/excl/quest

_SEED_MASK = 0xFFFFFFFFFFFFFFFF


@dataclass(frozen=True)
class MultiscaleConfig:
    """Sentence mask probability and the augmentation stream seed."""

    p_sent: float = 0.25
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.p_sent < 1.0:
            raise ConfigError(f"p_sent must be in [0, 1), got {self.p_sent}")


def record_rng(seed: int, epoch: int, index: int) -> np.random.Generator:
    """Deterministic per-sample stream keyed by (seed, epoch, sample index)."""
    return np.random.default_rng([seed & _SEED_MASK, epoch, index])


def split_sentences(text: str) -> list[str]:
    """Split a text into whitespace-normalized sentences, keeping terminators.

    A sentence boundary is a terminator character whose successor is
    whitespace or end of text, so "8.5" or "?!" runs stay intact.  Always
    returns at least one sentence for nonempty input.
    """
    if not text or not text.strip():
        raise DataError("cannot split an empty or whitespace-only text")
    sentences: list[str] = []
    buf: list[str] = []
    last = len(text) - 1
    for i, ch in enumerate(text):
        buf.append(ch)
        if ch in SENTENCE_TERMINATORS and (i == last or text[i + 1].isspace()):
            sentence = " ".join("".join(buf).split())
            if sentence:
                sentences.append(sentence)
            buf = []
    tail = " ".join("".join(buf).split())
    if tail:
        sentences.append(tail)
    return sentences


def sample_mask(n: int, p_sent: float, rng: np.random.Generator) -> np.ndarray:
    """Draw a keep/discard mask of length n; every entry keeps w.p. 1 - p_sent.

    If the draw discards everything, one uniformly random index is forced
    to keep (consuming one extra uniform), so downstream texts are nonempty.
    """
    if n < 1:
        raise ConfigError(f"mask length must be >= 1, got {n}")
    if not 0.0 <= p_sent < 1.0:
        raise ConfigError(f"p_sent must be in [0, 1), got {p_sent}")
    mask = rng.random(n) >= p_sent
    if not mask.any():
        mask[int(rng.random() * n)] = True
    return mask


def multiscale_text(sentences: list[str], mask: np.ndarray) -> str:
    """Rejoin the kept sentences in their original order, single-spaced."""
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (len(sentences),):
        raise ConfigError(
            f"mask length {mask.shape} does not match {len(sentences)} sentences"
        )
    if not mask.any():
        raise ConfigError("all-discarded mask reached the merge step")
    return " ".join(s for s, keep in zip(sentences, mask) if keep)


def multiscale_once(
    text: str, p_sent: float, rng: int | np.random.Generator
) -> str:
    """One full augmentation pass over a single text.

    `rng` is either an integer seed (one-shot use; the stream starts fresh)
    or a Generator (caller-managed stream, e.g. keyed per epoch and sample).
    """
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(int(rng) & _SEED_MASK)
    sentences = split_sentences(text)
    mask = sample_mask(len(sentences), p_sent, rng)
    return multiscale_text(sentences, mask)
