"""Flat JSON run configuration: schema, defaults, validation, hashing.

One document carries every training/loss/augmentation/prior/feature key.
Unknown keys are rejected so a typo cannot silently fall back to a
default.  Defaults are the best hyperparameters from the ablations:
gamma=0.4, token_positive_p=0.2, p_sent=0.25, pu_variant=nnpu.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .errors import ConfigError
from .model import FeatureConfig, TrainConfig
from .multiscale import MultiscaleConfig
from .prior import PriorConfig
from .puloss import LossConfig

SCHEMA_VERSION = 1
SEED_ENV_VAR = "MPU_SEED"

_BOOL = (bool,)
_INT = (int,)
_NUM = (int, float)
_OPT_INT = (int, type(None))
_OPT_NUM = (int, float, type(None))
_STR = (str,)
_LIST = (list,)

# key -> (default, allowed types)
RUN_CONFIG_SCHEMA: dict[str, tuple[Any, tuple[type, ...]]] = {
    "schema_version": (SCHEMA_VERSION, _INT),
    "seed": (0, _INT),
    # loss
    "gamma": (0.4, _NUM),
    "pu_variant": ("nnpu", _STR),
    "prior_mode": ("multiscale", _STR),
    "constant_prior": (None, _OPT_NUM),
    "surrogate": ("sigmoid", _STR),
    # prior
    "token_positive_p": (0.2, _NUM),
    "l_max": (512, _INT),
    # multiscaling
    "p_sent": (0.25, _NUM),
    "multiscale_enabled": (True, _BOOL),
    # optimizer
    "epochs": (5, _INT),
    "batch_size": (64, _INT),
    "learning_rate": (0.5, _NUM),
    "momentum": (0.9, _NUM),
    "l2": (0.0, _NUM),
    "drop_short_below": (None, _OPT_INT),
    # features
    "word_ngrams": ([1, 2], _LIST),
    "char_ngrams": ([3], _LIST),
    "hash_dim": (1 << 18, _INT),
    "lowercase": (True, _BOOL),
}

SYNTH_CONFIG_SCHEMA: dict[str, tuple[Any, tuple[type, ...]]] = {
    "schema_version": (SCHEMA_VERSION, _INT),
    "seed": (0, _INT),
    "vocab_size": (5000, _INT),
    "signal_tokens": (50, _INT),
    "signal_q": (0.2, _NUM),
    "short_lo": (4, _INT),
    "short_hi": (24, _INT),
    "long_lo": (64, _INT),
    "long_hi": (256, _INT),
    "short_weight": (0.5, _NUM),
    "n_per_class": (10_000, _INT),
    "n_test_per_class": (2000, _INT),
}


def _validate(raw: dict, schema: dict, what: str) -> dict:
    if not isinstance(raw, dict):
        raise ConfigError(f"{what} must be a JSON object")
    unknown = sorted(set(raw) - set(schema))
    if unknown:
        raise ConfigError(f"unknown {what} keys: {', '.join(unknown)}")
    resolved = {}
    for key, (default, types) in schema.items():
        value = raw.get(key, default)
        if not isinstance(value, types) or isinstance(value, bool) and bool not in types:
            raise ConfigError(f"{what} key {key!r} has invalid type {type(value).__name__}")
        resolved[key] = value
    if resolved["schema_version"] != SCHEMA_VERSION:
        raise ConfigError(
            f"unsupported {what} schema_version {resolved['schema_version']}"
        )
    return resolved


def _read_json(path: str | Path, what: str) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read {what} file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{what} file {path} is not valid JSON: {exc}") from exc


def _apply_seed_override(resolved: dict) -> dict:
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        try:
            resolved["seed"] = int(env)
        except ValueError as exc:
            raise ConfigError(f"{SEED_ENV_VAR} must be an integer, got {env!r}") from exc
    return resolved


@dataclass(frozen=True)
class RunConfig:
    """Validated flat run configuration; see RUN_CONFIG_SCHEMA for keys."""

    raw: dict

    @classmethod
    def defaults(cls, **overrides) -> "RunConfig":
        resolved = _validate(overrides, RUN_CONFIG_SCHEMA, "run config")
        return cls(raw=resolved)

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        resolved = _apply_seed_override(
            _validate(_read_json(path, "run config"), RUN_CONFIG_SCHEMA, "run config")
        )
        return cls(raw=resolved)

    def __getitem__(self, key: str):
        return self.raw[key]

    def loss_config(self) -> LossConfig:
        return LossConfig(
            gamma=float(self.raw["gamma"]),
            variant=self.raw["pu_variant"],
            prior_mode=self.raw["prior_mode"],
            constant_prior=(
                None
                if self.raw["constant_prior"] is None
                else float(self.raw["constant_prior"])
            ),
            surrogate=self.raw["surrogate"],
        )

    def prior_config(self) -> PriorConfig:
        return PriorConfig(p=float(self.raw["token_positive_p"]), l_max=self.raw["l_max"])

    def multiscale_config(self) -> MultiscaleConfig | None:
        if not self.raw["multiscale_enabled"]:
            return None
        return MultiscaleConfig(p_sent=float(self.raw["p_sent"]), seed=self.raw["seed"])

    def feature_config(self) -> FeatureConfig:
        return FeatureConfig(
            word_ngrams=tuple(self.raw["word_ngrams"]),
            char_ngrams=tuple(self.raw["char_ngrams"]),
            hash_dim=self.raw["hash_dim"],
            lowercase=self.raw["lowercase"],
        )

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            epochs=self.raw["epochs"],
            batch_size=self.raw["batch_size"],
            learning_rate=float(self.raw["learning_rate"]),
            momentum=float(self.raw["momentum"]),
            l2=float(self.raw["l2"]),
            seed=self.raw["seed"],
            loss=self.loss_config(),
            multiscale=self.multiscale_config(),
            prior=self.prior_config(),
            features=self.feature_config(),
            drop_short_below=self.raw["drop_short_below"],
        )


def load_synth_config(path: str | Path):
    from .data import SynthConfig

    resolved = _apply_seed_override(
        _validate(_read_json(path, "synth config"), SYNTH_CONFIG_SCHEMA, "synth config")
    )
    config = SynthConfig(
        vocab_size=resolved["vocab_size"],
        signal_tokens=resolved["signal_tokens"],
        signal_q=float(resolved["signal_q"]),
        short_band=(resolved["short_lo"], resolved["short_hi"]),
        long_band=(resolved["long_lo"], resolved["long_hi"]),
        short_weight=float(resolved["short_weight"]),
        n_per_class=resolved["n_per_class"],
        seed=resolved["seed"],
    )
    return config, resolved


def config_hash(resolved: dict) -> str:
    """sha256 of the canonical JSON encoding of a resolved parameter dict."""
    canonical = json.dumps(resolved, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
