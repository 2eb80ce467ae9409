"""JSON encodings for states and strategies.

A matrix is ``{"re": [[...]], "im": [[...]]}``, row-major. A state file adds
``"dim"`` and, for bipartite states, ``"dims": [dA, dB]``.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .discrimination import Strategy, Subchannel
from .errors import ParseError
from .report import atomic_write
from .states import validate_state


def encode_matrix(m) -> dict:
    m = np.asarray(m, dtype=complex)
    return {"re": m.real.tolist(), "im": m.imag.tolist()}


def decode_matrix(obj, *, where="<matrix>") -> np.ndarray:
    try:
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(where, 0, f"bad matrix encoding: {exc}") from exc
    if re.shape != im.shape or re.ndim != 2:
        raise ParseError(where, 0, f"re/im must be matching 2-D arrays, got {re.shape} and {im.shape}")
    return re + 1j * im


def _load_json(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(str(path), 0, str(exc)) from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(str(path), exc.lineno, exc.msg) from exc


def state_to_json(rho, dims=None) -> dict:
    rho = np.asarray(rho, dtype=complex)
    out = {"dim": rho.shape[0], **encode_matrix(rho)}
    if dims is not None:
        out["dims"] = [int(x) for x in dims]
    return out


def state_from_json(obj, *, where="<state>", validate=True):
    """Return ``(rho, dims)``; ``dims`` is ``None`` for unipartite states."""
    if not isinstance(obj, dict) or "dim" not in obj:
        raise ParseError(where, 0, "state object needs a 'dim' field")
    rho = decode_matrix(obj, where=where)
    d = int(obj["dim"])
    if rho.shape != (d, d):
        raise ParseError(where, 0, f"dim is {d} but matrix is {rho.shape[0]}x{rho.shape[1]}")
    dims = obj.get("dims")
    if dims is not None:
        dims = tuple(int(x) for x in dims)
        if len(dims) != 2 or dims[0] * dims[1] != d:
            raise ParseError(where, 0, f"dims {list(dims)} do not multiply to {d}")
    if validate:
        rho = validate_state(rho)
    return rho, dims


def read_state(path, validate=True):
    return state_from_json(_load_json(path), where=str(path), validate=validate)


def write_state(path, rho, dims=None) -> None:
    atomic_write(path, (json.dumps(state_to_json(rho, dims), indent=2) + "\n").encode())


def strategy_to_json(strategy) -> dict:
    return {
        "subchannels": [[encode_matrix(k) for k in sub.kraus] for sub in strategy.subchannels],
        "povm": [encode_matrix(m) for m in strategy.povm],
    }


def strategy_from_json(obj, *, where="<strategy>"):
    try:
        subs = [Subchannel([decode_matrix(k, where=where) for k in ks]) for ks in obj["subchannels"]]
        povm = [decode_matrix(m, where=where) for m in obj["povm"]]
    except (KeyError, TypeError) as exc:
        raise ParseError(where, 0, f"bad strategy encoding: {exc}") from exc
    return Strategy(subs, povm)


def read_strategy(path):
    return strategy_from_json(_load_json(path), where=str(path))


def write_strategy(path, strategy) -> None:
    atomic_write(path, (json.dumps(strategy_to_json(strategy), indent=2) + "\n").encode())
