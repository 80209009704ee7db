"""Exact length-variant positive priors from a clipped confidence walk.

An idealized recurrent discriminator reads a length-l text token by token,
holding a confidence in [0, 1] that the text is human-written.  Each token
moves the confidence by +1/l (with probability p, a "clear positive" token)
or -1/l (otherwise), hard-clipped to [0, 1], starting from confidence 1.
The confidence therefore lives on the l+1 lattice states {0, 1/l, ..., 1}
and evolves as a Markov chain with a band transition matrix.  The expected
final confidence is the positive prior pi(l) for texts of that length.

Two independent routes compute pi(l): iterated vector-matrix propagation
(`prior_exact`, costs O(l^2)) and explicit enumeration of all 2^l token
assignments (`prior_bruteforce`, the verification oracle, l <= 20 only).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

BRUTEFORCE_MAX_LENGTH = 20


def _check_args(l: int, p: float) -> None:
    if l < 1:
        raise ConfigError(f"sequence length must be >= 1, got {l}")
    if not 0.0 < p < 1.0:
        raise ConfigError(f"token positive probability must be in (0, 1), got {p}")


@dataclass(frozen=True)
class PriorConfig:
    """Parameters of the prior table: per-token positive probability and table size."""

    p: float
    l_max: int = 512

    def __post_init__(self) -> None:
        _check_args(self.l_max, self.p)


class TransitionMatrix:
    """Band-sparse transition matrix of the clipped confidence walk.

    Row i is the distribution of the next state given current state i/l:
    up to i+1 with probability p, down to i-1 with probability 1-p, with
    the boundary rows folding the clipped move back onto themselves
    (row 0 keeps mass 1-p at state 0; row l keeps mass p at state l).
    Only the two parameters are stored; `apply` propagates a state vector
    in O(l) instead of materializing the (l+1)x(l+1) matrix.
    """

    def __init__(self, l: int, p: float):
        _check_args(l, p)
        self.l = l
        self.p = p

    @property
    def shape(self) -> tuple[int, int]:
        return (self.l + 1, self.l + 1)

    def apply(self, sigma: np.ndarray) -> np.ndarray:
        """Return sigma @ P for a state probability vector sigma of length l+1."""
        if sigma.shape != (self.l + 1,):
            raise ConfigError(
                f"state vector must have length {self.l + 1}, got {sigma.shape}"
            )
        p = self.p
        out = np.empty(self.l + 1, dtype=np.float64)
        out[1:] = p * sigma[:-1]
        out[self.l] += p * sigma[self.l]
        out[0] = (1.0 - p) * sigma[0]
        out[:-1] += (1.0 - p) * sigma[1:]
        return out

    def to_dense(self) -> np.ndarray:
        """Materialize the full matrix (tests and inspection only)."""
        l, p = self.l, self.p
        dense = np.zeros((l + 1, l + 1), dtype=np.float64)
        dense[0, 0] = 1.0 - p
        dense[0, 1] = p
        for i in range(1, l):
            dense[i, i - 1] = 1.0 - p
            dense[i, i + 1] = p
        dense[l, l - 1] = 1.0 - p
        dense[l, l] = p
        return dense


def transition_matrix(l: int, p: float) -> TransitionMatrix:
    """Build the (l+1)-state band transition matrix for token-positive probability p."""
    return TransitionMatrix(l, p)


def _final_state(l: int, p: float) -> np.ndarray:
    """Propagate the one-hot top state through l transitions; returns sigma_l."""
    matrix = TransitionMatrix(l, p)
    sigma = np.zeros(l + 1, dtype=np.float64)
    sigma[l] = 1.0
    for _ in range(l):
        sigma = matrix.apply(sigma)
    return sigma


def prior_exact(l: int, p: float) -> float:
    """Expected final confidence pi(l) via the Markov chain, exact in float64.

    Starts from the one-hot top state, applies l band transitions, and takes
    the inner product with the confidence grid [0, 1/l, ..., 1].
    """
    sigma = _final_state(l, p)
    alpha = np.arange(l + 1, dtype=np.float64) / l
    return float(sigma @ alpha)


def top_state_mass(l: int, p: float) -> float:
    """Probability that the walk ends at confidence exactly 1 after l tokens."""
    return float(_final_state(l, p)[l])


def prior_bruteforce(l: int, p: float) -> float:
    """Verification oracle: enumerate all 2^l token assignments directly.

    Simulates the clip recurrence for every assignment of clear-positive /
    other tokens and returns the probability-weighted mean final confidence.
    Never touches the transition matrix.  Rejected above l = 20 (2^l paths).
    """
    _check_args(l, p)
    if l > BRUTEFORCE_MAX_LENGTH:
        raise ConfigError(
            f"bruteforce oracle enumerates 2^l paths; l={l} exceeds {BRUTEFORCE_MAX_LENGTH}"
        )
    n_paths = 1 << l
    paths = np.arange(n_paths, dtype=np.uint32)
    step = 1.0 / l
    confidence = np.ones(n_paths, dtype=np.float64)
    positives = np.zeros(n_paths, dtype=np.int64)
    for token in range(l):
        bit = (paths >> token) & 1
        move = np.where(bit == 1, step, -step)
        confidence = np.clip(confidence + move, 0.0, 1.0)
        positives += bit
    weights = p**positives * (1.0 - p) ** (l - positives)
    return float(np.sum(confidence * weights))


@dataclass(frozen=True)
class PriorTable:
    """Immutable table of pi(l) for l = 1..l_max at a fixed token probability p.

    Lookups for lengths beyond the table saturate at the last entry (the
    table converges toward 2p, so the saturation error is the remaining
    tail gap).  Lengths below 1 are rejected.
    """

    p: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size < 1:
            raise ConfigError("prior table requires a 1-d array of at least one entry")
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def l_max(self) -> int:
        return int(self.values.size)

    @classmethod
    def constant(cls, pi: float, l_max: int = 1) -> "PriorTable":
        """Degenerate table holding the same prior at every length."""
        if not 0.0 < pi < 1.0:
            raise ConfigError(f"constant prior must be in (0, 1), got {pi}")
        return cls(p=pi, values=np.full(l_max, pi, dtype=np.float64))

    def lookup(self, lengths) -> np.ndarray:
        """Vectorized prior lookup by token length, clamped to the table tail."""
        arr = np.asarray(lengths, dtype=np.int64)
        if np.any(arr < 1):
            raise ConfigError("token lengths must be >= 1 for prior lookup")
        idx = np.minimum(arr, self.l_max) - 1
        return self.values[idx]


def build_prior_table(config: PriorConfig) -> PriorTable:
    """Tabulate pi(l) for l = 1..l_max; built once, immutable thereafter."""
    values = np.empty(config.l_max, dtype=np.float64)
    for l in range(1, config.l_max + 1):
        values[l - 1] = prior_exact(l, config.p)
    return PriorTable(p=config.p, values=values)


def prior_curve(config: PriorConfig) -> list[tuple[int, float, float]]:
    """Rows (l, pi(l), top-state mass) for l = 1..l_max, for CSV emission."""
    rows = []
    for l in range(1, config.l_max + 1):
        sigma = _final_state(l, config.p)
        alpha = np.arange(l + 1, dtype=np.float64) / l
        rows.append((l, float(sigma @ alpha), float(sigma[l])))
    return rows
