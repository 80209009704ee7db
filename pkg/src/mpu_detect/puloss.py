"""Risk estimators for positive-unlabeled detector training, with gradients.

Conventions: scores are raw real-valued outputs of the decision function g,
labels are +1 (human, the positive class) or -1 (machine).  The unlabeled
set of the PU estimators is the machine set; the per-sample priors of the
multiscale estimator come from a `prior.PriorTable` looked up at each
positive sample's token length.

All functions are pure; gradients are exact analytic derivatives with
respect to the scores, using the plain subgradient convention at the
non-negative clamp (a clamped term contributes zero gradient).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BatchError, ConfigError
from .prior import PriorTable

SURROGATES = ("sigmoid", "logistic")
VARIANTS = ("upu", "nnpu")
PRIOR_MODES = ("constant", "multiscale")


def _as_scores(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise BatchError(f"{name} must be a 1-d array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise BatchError(f"{name} contains non-finite entries")
    return arr


def surrogate_loss(scores, labels, kind: str = "sigmoid") -> np.ndarray:
    """Elementwise surrogate loss L(z, y) for y in {+1, -1}.

    sigmoid:  L(z, y) = 1 / (1 + exp(y z)), bounded, with the symmetry
              L(z, +1) + L(z, -1) = 1.
    logistic: L(z, y) = ln(1 + exp(-y z)), the convex log loss.
    """
    z = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    margin = y * z
    if kind == "sigmoid":
        # 1/(1+e^m) written via exp(-|m|) to avoid overflow on both tails.
        e = np.exp(-np.abs(margin))
        return np.where(margin >= 0, e / (1.0 + e), 1.0 / (1.0 + e))
    if kind == "logistic":
        return np.logaddexp(0.0, -margin)
    raise ConfigError(f"unknown surrogate loss {kind!r}")


def surrogate_grad(scores, labels, kind: str = "sigmoid") -> np.ndarray:
    """Elementwise derivative dL(z, y)/dz."""
    z = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if kind == "sigmoid":
        loss = surrogate_loss(z, y, kind)
        return -y * loss * (1.0 - loss)
    if kind == "logistic":
        return -y * surrogate_loss(z, y, "sigmoid")
    raise ConfigError(f"unknown surrogate loss {kind!r}")


@dataclass(frozen=True)
class RiskBatch:
    """One optimization step's positive and unlabeled samples.

    pos_lengths may be omitted when only constant-prior estimators are
    evaluated; the multiscale estimator requires it.
    """

    pos_scores: np.ndarray
    unl_scores: np.ndarray
    pos_lengths: np.ndarray | None = None

    def __post_init__(self) -> None:
        pos = _as_scores(self.pos_scores, "pos_scores")
        unl = _as_scores(self.unl_scores, "unl_scores")
        if pos.size == 0 or unl.size == 0:
            raise BatchError("PU risk needs at least one positive and one unlabeled sample")
        object.__setattr__(self, "pos_scores", pos)
        object.__setattr__(self, "unl_scores", unl)
        if self.pos_lengths is not None:
            lengths = np.asarray(self.pos_lengths, dtype=np.int64)
            if lengths.shape != pos.shape:
                raise BatchError("pos_lengths must align one-to-one with pos_scores")
            if np.any(lengths < 1):
                raise BatchError("token lengths must be positive")
            object.__setattr__(self, "pos_lengths", lengths)

    @property
    def n_pos(self) -> int:
        return int(self.pos_scores.size)

    @property
    def n_unl(self) -> int:
        return int(self.unl_scores.size)


@dataclass(frozen=True)
class LossConfig:
    """Training-objective configuration: PN + gamma * multiscale-PU."""

    gamma: float = 0.4
    variant: str = "nnpu"
    prior_mode: str = "multiscale"
    constant_prior: float | None = None
    surrogate: str = "sigmoid"

    def __post_init__(self) -> None:
        if self.gamma < 0:
            raise ConfigError(f"gamma must be nonnegative, got {self.gamma}")
        if self.variant not in VARIANTS:
            raise ConfigError(f"pu variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.prior_mode not in PRIOR_MODES:
            raise ConfigError(
                f"prior mode must be one of {PRIOR_MODES}, got {self.prior_mode!r}"
            )
        if self.surrogate not in SURROGATES:
            raise ConfigError(
                f"surrogate must be one of {SURROGATES}, got {self.surrogate!r}"
            )
        if self.prior_mode == "constant":
            if self.constant_prior is None or not 0.0 < self.constant_prior < 1.0:
                raise ConfigError(
                    f"constant prior mode needs a prior in (0, 1), got {self.constant_prior}"
                )


def pn_risk(scores, labels, surrogate: str = "sigmoid") -> float:
    """Empirical mean surrogate loss over a fully labeled batch.

    With the class prior taken at its empirical frequency this is exactly
    the standard positive-negative risk estimate.
    """
    z = _as_scores(scores, "scores")
    y = np.asarray(labels, dtype=np.float64)
    if y.shape != z.shape:
        raise BatchError("scores and labels must align")
    if z.size == 0:
        raise BatchError("cannot evaluate risk of an empty batch")
    if not np.all(np.abs(y) == 1.0):
        raise BatchError("labels must be +1 or -1")
    return float(np.mean(surrogate_loss(z, y, surrogate)))


def _check_prior(prior: float) -> float:
    if not 0.0 <= prior < 1.0:
        raise ConfigError(f"class prior must be in [0, 1), got {prior}")
    return float(prior)


def upu_risk(batch: RiskBatch, prior: float, surrogate: str = "sigmoid") -> float:
    """Unbiased PU risk: pi*R_P(+1) - pi*R_P(-1) + R_U(-1).  May be negative."""
    pi = _check_prior(prior)
    pos_plus = np.mean(surrogate_loss(batch.pos_scores, 1.0, surrogate))
    pos_minus = np.mean(surrogate_loss(batch.pos_scores, -1.0, surrogate))
    unl_minus = np.mean(surrogate_loss(batch.unl_scores, -1.0, surrogate))
    return float(pi * pos_plus - pi * pos_minus + unl_minus)


def nnpu_risk(batch: RiskBatch, prior: float, surrogate: str = "sigmoid") -> float:
    """Non-negative PU risk: pi*R_P(+1) + max(0, R_U(-1) - pi*R_P(-1))."""
    pi = _check_prior(prior)
    pos_plus = np.mean(surrogate_loss(batch.pos_scores, 1.0, surrogate))
    pos_minus = np.mean(surrogate_loss(batch.pos_scores, -1.0, surrogate))
    unl_minus = np.mean(surrogate_loss(batch.unl_scores, -1.0, surrogate))
    return float(pi * pos_plus + max(0.0, unl_minus - pi * pos_minus))


def _mpu_terms(batch: RiskBatch, table: PriorTable, surrogate: str):
    if batch.pos_lengths is None:
        raise BatchError("multiscale risk requires pos_lengths on the batch")
    priors = table.lookup(batch.pos_lengths)
    pos_plus = np.mean(priors * surrogate_loss(batch.pos_scores, 1.0, surrogate))
    pos_minus = np.mean(priors * surrogate_loss(batch.pos_scores, -1.0, surrogate))
    unl_minus = np.mean(surrogate_loss(batch.unl_scores, -1.0, surrogate))
    return priors, float(pos_plus), float(pos_minus), float(unl_minus)


def mpu_risk_and_grad(
    batch: RiskBatch, table: PriorTable, variant: str = "nnpu", surrogate: str = "sigmoid"
) -> tuple[float, np.ndarray, np.ndarray]:
    """Multiscale PU risk plus its gradients w.r.t. positive and unlabeled scores.

    The prior-weighted positive risks are per-sample weighted means
    (1/n_P) * sum_i pi(l_i) * L(z_i, y), which reduce to the constant-prior
    estimators when all lengths share one prior.  Returns
    (risk, d_risk/d_pos_scores, d_risk/d_unl_scores); when the nnpu clamp
    is active the clamped term contributes zero gradient.
    """
    if variant not in VARIANTS:
        raise ConfigError(f"pu variant must be one of {VARIANTS}, got {variant!r}")
    priors, pos_plus, pos_minus, unl_minus = _mpu_terms(batch, table, surrogate)
    grad_pos_plus = priors * surrogate_grad(batch.pos_scores, 1.0, surrogate) / batch.n_pos
    grad_unl = surrogate_grad(batch.unl_scores, -1.0, surrogate) / batch.n_unl
    inner = unl_minus - pos_minus
    if variant == "nnpu" and inner <= 0.0:
        return pos_plus, grad_pos_plus, np.zeros_like(grad_unl)
    grad_pos_minus = priors * surrogate_grad(batch.pos_scores, -1.0, surrogate) / batch.n_pos
    return pos_plus + inner, grad_pos_plus - grad_pos_minus, grad_unl


def mpu_risk(
    batch: RiskBatch, table: PriorTable, variant: str = "nnpu", surrogate: str = "sigmoid"
) -> float:
    """Multiscale PU risk; see `mpu_risk_and_grad` for the estimator."""
    return mpu_risk_and_grad(batch, table, variant, surrogate)[0]


def pn_risk_and_grad(
    scores, labels, surrogate: str = "sigmoid"
) -> tuple[float, np.ndarray]:
    """PN risk plus its gradient w.r.t. every score."""
    risk = pn_risk(scores, labels, surrogate)
    z = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    return risk, surrogate_grad(z, y, surrogate) / z.size


def _split_batch(scores, labels, lengths) -> tuple[np.ndarray, RiskBatch]:
    z = _as_scores(scores, "scores")
    y = np.asarray(labels, dtype=np.float64)
    if y.shape != z.shape:
        raise BatchError("scores and labels must align")
    pos_mask = y == 1.0
    unl_mask = y == -1.0
    if not np.all(pos_mask | unl_mask):
        raise BatchError("labels must be +1 or -1")
    pos_lengths = None
    if lengths is not None:
        arr = np.asarray(lengths, dtype=np.int64)
        if arr.shape != z.shape:
            raise BatchError("lengths must align with scores")
        pos_lengths = arr[pos_mask]
    batch = RiskBatch(
        pos_scores=z[pos_mask], unl_scores=z[unl_mask], pos_lengths=pos_lengths
    )
    return pos_mask, batch


def _resolve_pu_batch(
    config: LossConfig, batch: RiskBatch, table: PriorTable | None
) -> tuple[RiskBatch, PriorTable]:
    """Resolve the prior source and make sure the batch carries usable lengths."""
    if config.prior_mode == "constant":
        resolved = PriorTable.constant(config.constant_prior)
        if batch.pos_lengths is None:
            batch = RiskBatch(
                batch.pos_scores,
                batch.unl_scores,
                np.ones(batch.n_pos, dtype=np.int64),
            )
        return batch, resolved
    if table is None:
        raise ConfigError("multiscale prior mode requires a PriorTable")
    if batch.pos_lengths is None:
        raise BatchError("multiscale risk requires sample lengths")
    return batch, table


def total_loss(
    scores,
    labels,
    config: LossConfig,
    lengths=None,
    table: PriorTable | None = None,
) -> float:
    """Combined objective: PN risk + gamma * multiscale PU risk.

    Every sample carries its origin label; human (+1) samples feed the PN
    term and the PU positive set, machine (-1) samples feed the PN term
    and the PU unlabeled set.  With gamma = 0 this is plain PN training
    and neither lengths nor a prior table is consulted.
    """
    pn = pn_risk(scores, labels, config.surrogate)
    if config.gamma == 0.0:
        return pn
    _, batch = _split_batch(scores, labels, lengths)
    batch, resolved = _resolve_pu_batch(config, batch, table)
    mpu = mpu_risk(batch, resolved, config.variant, config.surrogate)
    return pn + config.gamma * mpu


def loss_gradient(
    scores,
    labels,
    config: LossConfig,
    lengths=None,
    table: PriorTable | None = None,
) -> np.ndarray:
    """d(total_loss)/d(score_i), aligned with the input batch order."""
    _, grad = pn_risk_and_grad(scores, labels, config.surrogate)
    if config.gamma == 0.0:
        return grad
    pos_mask, batch = _split_batch(scores, labels, lengths)
    batch, resolved = _resolve_pu_batch(config, batch, table)
    _, grad_pos, grad_unl = mpu_risk_and_grad(
        batch, resolved, config.variant, config.surrogate
    )
    grad[pos_mask] += config.gamma * grad_pos
    grad[~pos_mask] += config.gamma * grad_unl
    return grad
