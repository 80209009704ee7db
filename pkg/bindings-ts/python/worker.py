"""Line-protocol worker behind the TypeScript bindings.

Reads one JSON request per line on stdin, writes one JSON response per
line on stdout.  Every operation delegates to the installed `mpu_detect`
package, so results are bit-identical to the primary implementation; all
floats cross the pipe as shortest round-trip decimals, which JSON parses
back to the same binary64 on both sides.

Requests:  {"id": int, "op": str, "args": {...}}
Responses: {"id": int, "ok": true, "result": ...}
           {"id": int, "ok": false, "error": {"type": str, "message": str}}
"""

import json
import sys

from mpu_detect.errors import MpuError
from mpu_detect.multiscale import multiscale_once
from mpu_detect.prior import PriorConfig, build_prior_table, prior_bruteforce
from mpu_detect.puloss import RiskBatch, mpu_risk_and_grad, pn_risk_and_grad

_tables = {}


class BoundaryError(ValueError):
    pass


def _table(p: float, l_max: int):
    key = (float(p), int(l_max))
    if key not in _tables:
        _tables[key] = build_prior_table(PriorConfig(p=key[0], l_max=key[1]))
    return _tables[key]


def _floats(name: str, values) -> list[float]:
    if not isinstance(values, list):
        raise BoundaryError(f"{name} must be an array")
    out = []
    for i, value in enumerate(values):
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise BoundaryError(f"{name}[{i}] is not a finite number")
        value = float(value)
        if value != value or value in (float("inf"), float("-inf")):
            raise BoundaryError(f"{name}[{i}] is not finite")
        out.append(value)
    return out


def _ints(name: str, values) -> list[int]:
    out = []
    for i, value in enumerate(_floats(name, values)):
        if value != int(value):
            raise BoundaryError(f"{name}[{i}] must be an integer")
        out.append(int(value))
    return out


def op_prior_table(args):
    table = _table(args["p"], args["l_max"])
    return {"p": table.p, "l_max": table.l_max, "values": [float(v) for v in table.values]}


def op_prior_bruteforce(args):
    return {"value": prior_bruteforce(int(args["l"]), float(args["p"]))}


def op_mpu_loss(args):
    pos_scores = _floats("pos_scores", args["pos_scores"])
    pos_lengths = _ints("pos_lengths", args["pos_lengths"])
    unl_scores = _floats("unl_scores", args["unl_scores"])
    pn_scores = _floats("pn_scores", args["pn_scores"])
    pn_labels = _ints("pn_labels", args["pn_labels"])
    if len(pos_lengths) != len(pos_scores):
        raise BoundaryError(
            f"pos_lengths has {len(pos_lengths)} entries for {len(pos_scores)} scores"
        )
    if len(pn_labels) != len(pn_scores):
        raise BoundaryError(
            f"pn_labels has {len(pn_labels)} entries for {len(pn_scores)} scores"
        )
    gamma = float(args["gamma"])
    variant = args.get("variant", "nnpu")
    surrogate = args.get("surrogate", "sigmoid")
    pn_value, pn_grad = pn_risk_and_grad(pn_scores, pn_labels, surrogate)
    if gamma == 0.0:
        pos_grad = [0.0] * len(pos_scores)
        unl_grad = [0.0] * len(unl_scores)
        loss = pn_value
    else:
        table = _table(args["p"], args["l_max"])
        batch = RiskBatch(
            pos_scores=pos_scores, unl_scores=unl_scores, pos_lengths=pos_lengths
        )
        mpu_value, grad_pos, grad_unl = mpu_risk_and_grad(
            batch, table, variant, surrogate
        )
        loss = pn_value + gamma * mpu_value
        pos_grad = [float(gamma * g) for g in grad_pos]
        unl_grad = [float(gamma * g) for g in grad_unl]
    return {
        "loss": float(loss),
        "pos_grad": pos_grad,
        "unl_grad": unl_grad,
        "pn_grad": [float(g) for g in pn_grad],
    }


def op_multiscale(args):
    text = args["text"]
    if not isinstance(text, str) or not text.strip():
        raise BoundaryError("text must be a nonempty string")
    return {"text": multiscale_once(text, float(args["p_sent"]), int(args["seed"]))}


OPS = {
    "prior_table": op_prior_table,
    "prior_bruteforce": op_prior_bruteforce,
    "mpu_loss": op_mpu_loss,
    "multiscale": op_multiscale,
}


def main() -> None:
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        request_id = None
        try:
            request = json.loads(line)
            request_id = request.get("id")
            handler = OPS.get(request["op"])
            if handler is None:
                raise BoundaryError(f"unknown op {request['op']!r}")
            response = {"id": request_id, "ok": True, "result": handler(request["args"])}
        except (BoundaryError, MpuError, KeyError, TypeError, ValueError) as exc:
            response = {
                "id": request_id,
                "ok": False,
                "error": {"type": type(exc).__name__, "message": str(exc)},
            }
        sys.stdout.write(json.dumps(response) + "\n")
        sys.stdout.flush()


if __name__ == "__main__":
    main()
