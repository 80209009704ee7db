"""Generate the golden parity suite by calling the primary package directly.

Emits JSON with 200 cases across the three bound operations; the vitest
suite replays each case through the TypeScript API and demands exact
equality, which holds because both sides print floats as shortest
round-trip decimals.
"""

import json
import sys

import numpy as np

from mpu_detect.multiscale import multiscale_once
from mpu_detect.prior import PriorConfig, build_prior_table, prior_bruteforce
from mpu_detect.puloss import RiskBatch, mpu_risk_and_grad, pn_risk_and_grad

rng = np.random.default_rng(20240)
cases = []

# 40 prior-table cases with lookup probes (clamped and in-range)
for _ in range(40):
    p = float(rng.uniform(0.05, 0.6))
    l_max = int(rng.integers(1, 40))
    table = build_prior_table(PriorConfig(p=p, l_max=l_max))
    probes = sorted({1, l_max, l_max + 7, int(rng.integers(1, l_max + 20))})
    cases.append(
        {
            "op": "prior_table",
            "p": p,
            "l_max": l_max,
            "values": [float(v) for v in table.values],
            "lookups": {str(l): float(table.lookup(l)) for l in probes},
        }
    )

# 20 oracle cross-checks: tabulated prior vs 2^l enumeration
for _ in range(20):
    p = float(rng.choice([0.1, 0.2, 0.3, 0.4]))
    l = int(rng.integers(1, 15))
    cases.append(
        {
            "op": "prior_bruteforce",
            "p": p,
            "l": l,
            "value": prior_bruteforce(l, p),
            "table_value": float(build_prior_table(PriorConfig(p=p, l_max=l)).values[-1]),
        }
    )

# 100 loss/gradient cases across variants, surrogates, and gamma=0
for i in range(100):
    n_pos = int(rng.integers(1, 8))
    n_unl = int(rng.integers(1, 8))
    n_pn = int(rng.integers(1, 10))
    p = float(rng.choice([0.1, 0.2, 0.3]))
    l_max = 64
    gamma = 0.0 if i % 10 == 0 else float(rng.uniform(0.1, 1.0))
    variant = ["upu", "nnpu"][int(rng.integers(2))]
    surrogate = ["sigmoid", "logistic"][int(rng.integers(2))]
    args = {
        "pos_scores": [float(x) for x in rng.normal(0, 4, n_pos)],
        "pos_lengths": [int(x) for x in rng.integers(1, 80, n_pos)],
        "unl_scores": [float(x) for x in rng.normal(0, 4, n_unl)],
        "pn_scores": [float(x) for x in rng.normal(0, 4, n_pn)],
        "pn_labels": [int(x) for x in rng.choice([1, -1], n_pn)],
        "gamma": gamma,
        "p": p,
        "l_max": l_max,
        "variant": variant,
        "surrogate": surrogate,
    }
    pn_value, pn_grad = pn_risk_and_grad(
        args["pn_scores"], args["pn_labels"], surrogate
    )
    if gamma == 0.0:
        expected = {
            "loss": float(pn_value),
            "pos_grad": [0.0] * n_pos,
            "unl_grad": [0.0] * n_unl,
            "pn_grad": [float(g) for g in pn_grad],
        }
    else:
        table = build_prior_table(PriorConfig(p=p, l_max=l_max))
        batch = RiskBatch(
            pos_scores=args["pos_scores"],
            unl_scores=args["unl_scores"],
            pos_lengths=args["pos_lengths"],
        )
        mpu_value, grad_pos, grad_unl = mpu_risk_and_grad(
            batch, table, variant, surrogate
        )
        expected = {
            "loss": float(pn_value + gamma * mpu_value),
            "pos_grad": [float(gamma * g) for g in grad_pos],
            "unl_grad": [float(gamma * g) for g in grad_unl],
            "pn_grad": [float(g) for g in pn_grad],
        }
    cases.append({"op": "mpu_loss", "args": args, "expected": expected})

# 40 multiscale cases
for i in range(40):
    n_sentences = int(rng.integers(1, 12))
    sentences = []
    for s in range(n_sentences):
        words = [f"w{int(x)}" for x in rng.integers(0, 500, int(rng.integers(1, 9)))]
        sentences.append(" ".join(words) + ".")
    text = " ".join(sentences)
    p_sent = float(rng.choice([0.0, 0.25, 0.5, 0.75]))
    seed = int(rng.integers(0, 2**31))
    cases.append(
        {
            "op": "multiscale",
            "text": text,
            "p_sent": p_sent,
            "seed": seed,
            "expected": multiscale_once(text, p_sent, seed),
        }
    )

assert len(cases) == 200
json.dump({"cases": cases}, sys.stdout)
