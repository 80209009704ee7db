"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
lines.  The two directional criteria train 15 models on the frozen
synthetic benchmark and together stay inside the stated runtime budget on
one desktop core.
"""

import itertools
import json
import subprocess
import sys
import time

import numpy as np
import pytest

from mpu_detect.data import SynthConfig, clean_spaces, synth_benchmark
from mpu_detect.model import (
    FeatureConfig,
    Featurizer,
    TrainConfig,
    evaluate,
    train,
)
from mpu_detect.multiscale import MultiscaleConfig, sample_mask
from mpu_detect.prior import (
    PriorConfig,
    PriorTable,
    build_prior_table,
    prior_bruteforce,
    prior_exact,
    top_state_mass,
)
from mpu_detect.puloss import (
    LossConfig,
    RiskBatch,
    loss_gradient,
    mpu_risk,
    nnpu_risk,
    pn_risk,
    surrogate_loss,
    total_loss,
    upu_risk,
)


def report(name: str, ok: bool, detail: str = "") -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] {name}"
    if detail:
        line += f" ({detail})"
    print(line)
    assert ok, line


# --------------------------------------------------------------------------
# Exact-math criteria
# --------------------------------------------------------------------------


def test_prior_oracle_equivalence():
    started = time.monotonic()
    worst = 0.0
    for p in (0.1, 0.2, 0.3, 0.4):
        for l in range(1, 15):
            worst = max(worst, abs(prior_exact(l, p) - prior_bruteforce(l, p)))
    elapsed = time.monotonic() - started
    report(
        "prior oracle equivalence (l=1..14, p in {0.1..0.4})",
        worst < 1e-10 and elapsed < 30.0,
        f"worst |exact-brute|={worst:.2e}, {elapsed:.1f}s",
    )


def test_prior_anchors():
    anchor_1 = all(prior_exact(1, p) == p for p in (0.1, 0.2, 0.3, 0.4, 0.5))
    anchor_2 = abs(prior_exact(2, 0.2) - 0.28) < 1e-12
    table = build_prior_table(PriorConfig(p=0.2, l_max=200))
    monotone = bool(np.all(np.diff(table.values) >= 0))
    limit = abs(table.values[-1] - 0.4) < 0.02
    report(
        "prior anchors: pi(1)=p, pi(2)=0.28, monotone to 2p",
        anchor_1 and anchor_2 and monotone and limit,
        f"pi(200)={table.values[-1]:.6f}",
    )


def test_prior_recurrence_consistency():
    p = 0.2
    worst = 0.0
    for l in range(1, 51):
        lhs = prior_exact(l + 1, p)
        rhs = l / (l + 1) * prior_exact(l, p) + (2 * p - top_state_mass(l, p) * p) / (
            l + 1
        )
        worst = max(worst, abs(lhs - rhs))
    report("prior recurrence consistency (l=1..50)", worst < 1e-10, f"worst={worst:.2e}")


def test_loss_identities():
    rng = np.random.default_rng(101)
    table = build_prior_table(PriorConfig(p=0.2, l_max=64))
    clamp_matches = constant_matches = symmetry_holds = linear_holds = True
    inactive_seen = 0
    for _ in range(1000):
        n_pos, n_unl = int(rng.integers(1, 10)), int(rng.integers(1, 10))
        batch = RiskBatch(
            pos_scores=rng.normal(0, 4, n_pos),
            unl_scores=rng.normal(0, 4, n_unl),
            pos_lengths=rng.integers(1, 64, n_pos),
        )
        pi = float(rng.uniform(0.05, 0.95))
        inner = np.mean(surrogate_loss(batch.unl_scores, -1.0)) - pi * np.mean(
            surrogate_loss(batch.pos_scores, -1.0)
        )
        if inner >= 0:
            inactive_seen += 1
            clamp_matches &= abs(nnpu_risk(batch, pi) - upu_risk(batch, pi)) < 1e-12
        constant = PriorTable.constant(pi)
        constant_matches &= (
            abs(mpu_risk(batch, constant, "upu") - upu_risk(batch, pi)) < 1e-12
            and abs(mpu_risk(batch, constant, "nnpu") - nnpu_risk(batch, pi)) < 1e-12
        )
        symmetry = (
            2 * pi * np.mean(surrogate_loss(batch.pos_scores, 1.0))
            - pi
            + np.mean(surrogate_loss(batch.unl_scores, -1.0))
        )
        symmetry_holds &= abs(upu_risk(batch, pi) - symmetry) < 1e-12

        scores = np.concatenate([batch.pos_scores, batch.unl_scores])
        labels = np.concatenate([np.ones(n_pos), -np.ones(n_unl)])
        lengths = np.concatenate(
            [batch.pos_lengths, rng.integers(1, 64, n_unl)]
        )
        gamma = float(rng.uniform(0.1, 1.0))
        pn = pn_risk(scores, labels)
        one = total_loss(
            scores, labels, LossConfig(gamma=gamma), lengths=lengths, table=table
        )
        two = total_loss(
            scores, labels, LossConfig(gamma=2 * gamma), lengths=lengths, table=table
        )
        linear_holds &= abs((two - pn) - 2 * (one - pn)) < 1e-12
    report(
        "loss identities: nnpu=upu off-clamp, constant-table, symmetry, gamma-linearity",
        clamp_matches
        and constant_matches
        and symmetry_holds
        and linear_holds
        and inactive_seen > 200,
        f"{inactive_seen}/1000 clamp-inactive batches",
    )


def test_gradient_suite():
    rng = np.random.default_rng(202)
    table = build_prior_table(PriorConfig(p=0.2, l_max=64))
    h = 1e-5

    # loss-level: analytic vs central differences, 100 instances off the kink
    worst_loss_level = 0.0
    checked = 0
    while checked < 100:
        n = int(rng.integers(2, 12))
        scores = rng.normal(0, 3, n)
        labels = rng.choice([1.0, -1.0], n)
        labels[0], labels[1] = 1.0, -1.0
        lengths = rng.integers(1, 64, n)
        config = LossConfig(
            gamma=float(rng.uniform(0.0, 1.0)),
            variant=("upu", "nnpu")[int(rng.integers(2))],
            surrogate=("sigmoid", "logistic")[int(rng.integers(2))],
        )
        if config.gamma > 0 and config.variant == "nnpu":
            pos, unl = scores[labels == 1], scores[labels == -1]
            priors = table.lookup(lengths[labels == 1])
            inner = np.mean(surrogate_loss(unl, -1.0, config.surrogate)) - np.mean(
                priors * surrogate_loss(pos, -1.0, config.surrogate)
            )
            if abs(inner) < 1e-3:
                continue
        analytic = loss_gradient(scores, labels, config, lengths=lengths, table=table)
        for i in range(n):
            up, down = scores.copy(), scores.copy()
            up[i] += h
            down[i] -= h
            fd = (
                total_loss(up, labels, config, lengths=lengths, table=table)
                - total_loss(down, labels, config, lengths=lengths, table=table)
            ) / (2 * h)
            worst_loss_level = max(
                worst_loss_level, abs(analytic[i] - fd) / max(1.0, abs(analytic[i]))
            )
        checked += 1

    # end-to-end: through the hashed linear model at hash_dim 2^8
    features = FeatureConfig(word_ngrams=(1, 2), char_ngrams=(), hash_dim=1 << 8)
    featurizer = Featurizer(features)
    vocabulary = [f"tok{i}" for i in range(40)]
    worst_end_to_end = 0.0
    for _ in range(100):
        n = int(rng.integers(3, 8))
        texts = [
            " ".join(rng.choice(vocabulary, size=rng.integers(3, 12))) + "."
            for _ in range(n)
        ]
        labels = rng.choice([1.0, -1.0], n)
        labels[0], labels[1] = 1.0, -1.0
        feats = [featurizer.features(t) for t in texts]
        lengths = np.array([len(featurizer.tokenize(t)) for t in texts])
        config = LossConfig(gamma=0.4, variant="upu")
        weights = rng.normal(0, 0.2, features.hash_dim)
        bias = float(rng.normal())

        def corpus_loss(w, b):
            scores = np.array([w[fi] @ fv + b for fi, fv in feats])
            return total_loss(scores, labels, config, lengths=lengths, table=table)

        scores = np.array([weights[fi] @ fv + bias for fi, fv in feats])
        grad_scores = loss_gradient(
            scores, labels, config, lengths=lengths, table=table
        )
        grad_w = np.zeros(features.hash_dim)
        for (fi, fv), g in zip(feats, grad_scores):
            np.add.at(grad_w, fi, fv * g)
        for k in rng.choice(features.hash_dim, size=8, replace=False):
            up, down = weights.copy(), weights.copy()
            up[k] += h
            down[k] -= h
            fd = (corpus_loss(up, bias) - corpus_loss(down, bias)) / (2 * h)
            worst_end_to_end = max(
                worst_end_to_end, abs(grad_w[k] - fd) / max(1.0, abs(grad_w[k]))
            )
    report(
        "gradient suite: loss-level < 1e-5, end-to-end < 1e-4 relative",
        worst_loss_level < 1e-5 and worst_end_to_end < 1e-4,
        f"loss-level {worst_loss_level:.2e}, end-to-end {worst_end_to_end:.2e}",
    )


def test_multiscale_statistics():
    n, p_sent, trials = 4, 0.25, 100_000
    expectation = second_moment = 0.0
    for bits in itertools.product((0, 1), repeat=n):
        prob = 1.0
        for b in bits:
            prob *= (1 - p_sent) if b else p_sent
        kept = sum(bits) if any(bits) else 1  # force-keep adjustment
        expectation += prob * kept
        second_moment += prob * kept * kept
    variance = second_moment - expectation**2
    rng = np.random.default_rng(303)
    counts = np.array(
        [sample_mask(n, p_sent, rng).sum() for _ in range(trials)], dtype=float
    )
    deviation = abs(counts.mean() - expectation)
    bound = 3 * np.sqrt(variance / trials)
    report(
        "multiscale keep statistics vs enumerated expectation",
        deviation < bound,
        f"|{counts.mean():.5f} - {expectation:.5f}| < {bound:.5f}",
    )


def test_cleaning_golden():
    golden = (
        clean_spaces("Same thing for best sellers .")
        == "Same thing for best sellers."
        and clean_spaces(
            "Also , IIRC the rankings change every week or something like that ."
        )
        == "Also, IIRC the rankings change every week or something like that."
    )
    rng = np.random.default_rng(404)
    alphabet = list("abc .,!?;:'\")(\t")
    idempotent = True
    for _ in range(10_000):
        text = "".join(rng.choice(alphabet, size=rng.integers(0, 30)))
        once = clean_spaces(text)
        idempotent &= clean_spaces(once) == once
    report(
        "cleaning golden strings and idempotence on 10k random strings",
        golden and idempotent,
    )


# --------------------------------------------------------------------------
# Directional reproduction on the frozen synthetic benchmark
# --------------------------------------------------------------------------

BENCHMARK_FEATURES = FeatureConfig(word_ngrams=(1, 2), char_ngrams=(), hash_dim=1 << 13)
BENCHMARK_SEEDS = range(5)


@pytest.fixture(scope="module")
def benchmark():
    config = SynthConfig(seed=2024, short_weight=0.35)
    train_set, test_short, test_long = synth_benchmark(config, n_test_per_class=2000)
    featurizer = Featurizer(BENCHMARK_FEATURES)
    token_lengths = sorted(len(featurizer.tokenize(r.text)) for r in train_set)
    q1 = token_lengths[len(token_lengths) // 4]
    return train_set, test_short, test_long, q1


def _run_arm(benchmark, seed, gamma, multiscale, drop=None):
    train_set, test_short, test_long, _ = benchmark
    config = TrainConfig(
        epochs=5,
        batch_size=32,
        learning_rate=1.0,
        momentum=0.9,
        seed=seed,
        loss=LossConfig(gamma=gamma, variant="nnpu", prior_mode="multiscale"),
        multiscale=MultiscaleConfig(p_sent=0.25, seed=seed) if multiscale else None,
        prior=PriorConfig(p=0.2, l_max=512),
        features=BENCHMARK_FEATURES,
        drop_short_below=drop,
    )
    model, _ = train(train_set, config)
    return evaluate(model, test_short).f1, evaluate(model, test_long).f1


@pytest.fixture(scope="module")
def pn_baseline(benchmark):
    return [_run_arm(benchmark, seed, 0.0, False) for seed in BENCHMARK_SEEDS]


def test_short_split_gain_without_long_split_loss(benchmark, pn_baseline):
    started = time.monotonic()
    mpu = [_run_arm(benchmark, seed, 0.4, True) for seed in BENCHMARK_SEEDS]
    elapsed = time.monotonic() - started
    pn_short = float(np.mean([x[0] for x in pn_baseline]))
    pn_long = float(np.mean([x[1] for x in pn_baseline]))
    mpu_short = float(np.mean([x[0] for x in mpu]))
    mpu_long = float(np.mean([x[1] for x in mpu]))
    report(
        "MPU beats the PN baseline on the short split and holds the long split",
        mpu_short > pn_short and mpu_long >= pn_long - 0.02 and elapsed < 600,
        f"short {mpu_short:.4f} vs {pn_short:.4f}, long {mpu_long:.4f} vs {pn_long:.4f}, "
        f"MPU arm {elapsed:.0f}s",
    )


def test_training_without_short_texts_helps_short_split(benchmark, pn_baseline):
    _, _, _, q1 = benchmark
    dropped = [_run_arm(benchmark, seed, 0.0, False, drop=q1) for seed in BENCHMARK_SEEDS]
    pn_short = float(np.mean([x[0] for x in pn_baseline]))
    drop_short = float(np.mean([x[0] for x in dropped]))
    report(
        "drop-short PN training >= all-texts PN on the short split",
        drop_short >= pn_short,
        f"short {drop_short:.4f} vs {pn_short:.4f} (Q1={q1})",
    )


# --------------------------------------------------------------------------
# End-to-end determinism through the CLI
# --------------------------------------------------------------------------


def test_determinism_bit_identical_runs(tmp_path):
    corpus = synth_benchmark(
        SynthConfig(seed=55, n_per_class=300, short_weight=0.35), n_test_per_class=100
    )
    train_path = tmp_path / "train.jsonl"
    test_path = tmp_path / "test.jsonl"
    from mpu_detect.data import write_jsonl

    write_jsonl(corpus[0], train_path)
    write_jsonl(corpus[1], test_path)
    config_path = tmp_path / "run.json"
    config_path.write_text(
        json.dumps(
            {
                "seed": 3,
                "epochs": 2,
                "batch_size": 32,
                "hash_dim": 1 << 13,
                "word_ngrams": [1, 2],
                "char_ngrams": [],
            }
        ),
        encoding="utf-8",
    )

    outputs = []
    for tag in ("a", "b"):
        model_path = tmp_path / f"model_{tag}.json"
        report_path = tmp_path / f"report_{tag}.json"
        for argv in (
            [
                "train",
                "--config",
                str(config_path),
                "--train",
                str(train_path),
                "--out",
                str(model_path),
            ],
            [
                "eval",
                "--model",
                str(model_path),
                "--test",
                str(test_path),
                "--buckets",
                "0:32,32:inf",
                "--report",
                str(report_path),
            ],
        ):
            proc = subprocess.run(
                [sys.executable, "-m", "mpu_detect", *argv],
                capture_output=True,
                text=True,
            )
            assert proc.returncode == 0, proc.stderr
        outputs.append(
            (
                model_path.read_bytes(),
                (tmp_path / f"model_{tag}.json.metrics.json").read_bytes(),
                report_path.read_bytes(),
            )
        )
    report(
        "determinism: identical config+seed give bit-identical model and reports",
        outputs[0] == outputs[1],
    )
