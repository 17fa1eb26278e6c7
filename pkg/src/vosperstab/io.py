"""JSON record formats: residue sets, decompositions, reports.

Every record is canonical JSON (sorted keys, shortest round-trip floats), so
save(load(text)) == text byte for byte.
"""
from __future__ import annotations

import datetime as _dt
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .decomposition import Decomposition
from .errors import ParseError
from .fourier import DensityFunction, is_prime
from .torus import TorusHom, TrigPolynomial
from .vosper import ResidueSet

SET_FORMAT = "vosperstab.set/1"
DECOMP_FORMAT = "vosperstab.decomposition/1"


def _default(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, complex):
        return [o.real, o.imag]
    if isinstance(o, (set, frozenset)):
        return sorted(o)
    raise TypeError(f"not serializable: {type(o).__name__}")


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1, default=_default, allow_nan=False) + "\n"


def _byte_offset(text: str, pos: int) -> int:
    return len(text[:pos].encode("utf-8"))


def parse_json(data: bytes | str):
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as e:
            raise ParseError(f"invalid UTF-8: {e.reason}", e.start) from None
    else:
        text = data
    try:
        return json.loads(text), text
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, _byte_offset(text, e.pos)) from None


def _key_offset(text: str, key: str) -> int:
    i = text.find(f'"{key}"')
    return _byte_offset(text, i) if i >= 0 else 0


@dataclass(frozen=True)
class SetRecord:
    p: int
    members: tuple
    provenance: dict = field(default_factory=dict)

    def residue_set(self) -> ResidueSet:
        return ResidueSet(self.p, self.members)

    def to_dict(self) -> dict:
        out = {"format": SET_FORMAT, "p": self.p, "members": list(self.members)}
        if self.provenance:
            out["provenance"] = self.provenance
        return out

    def dumps(self) -> str:
        return dumps(self.to_dict())

    @classmethod
    def from_set(cls, S: ResidueSet, provenance: dict | None = None) -> "SetRecord":
        return cls(S.p, tuple(S.members), provenance or {})


def load_set(data: bytes | str) -> SetRecord:
    obj, text = parse_json(data)
    if not isinstance(obj, dict):
        raise ParseError("top level must be an object", 0)
    if obj.get("format") != SET_FORMAT:
        raise ParseError(f"expected format {SET_FORMAT!r}", _key_offset(text, "format"))
    p = obj.get("p")
    if not isinstance(p, int) or isinstance(p, bool) or not is_prime(p):
        raise ParseError("p must be a prime integer", _key_offset(text, "p"))
    mem = obj.get("members")
    off = _key_offset(text, "members")
    if not isinstance(mem, list) or not all(isinstance(a, int) and not isinstance(a, bool) for a in mem):
        raise ParseError("members must be a list of integers", off)
    if any(a < 0 or a >= p for a in mem):
        raise ParseError("members must lie in [0, p)", off)
    if any(b <= a for a, b in zip(mem, mem[1:])):
        raise ParseError("members must be strictly increasing", off)
    prov = obj.get("provenance", {})
    if not isinstance(prov, dict):
        raise ParseError("provenance must be an object", _key_offset(text, "provenance"))
    extra = set(obj) - {"format", "p", "members", "provenance"}
    if extra:
        raise ParseError(f"unknown fields {sorted(extra)}", _key_offset(text, sorted(extra)[0]))
    return SetRecord(p, tuple(mem), prov)


def read_set(path) -> SetRecord:
    return load_set(Path(path).read_bytes())


def envelope(kind: str, payload: dict, config: dict, seed=None, timestamp: str | None = None) -> dict:
    """Wrap a result with tool version, full configuration and seed."""
    ts = timestamp or _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    return {"kind": kind, "tool": {"name": "vosperstab", "version": __version__},
            "config": config, "seed": seed, "timestamp": ts, "result": payload}


def strip_timestamp(text: str) -> str:
    obj = json.loads(text)
    obj.pop("timestamp", None)
    return dumps(obj)


def _fn(f: DensityFunction):
    v = f.values
    if np.iscomplexobj(v):
        return {"re": v.real.tolist(), "im": v.imag.tolist()}
    return v.tolist()


def _unfn(p, v) -> DensityFunction:
    if isinstance(v, dict):
        return DensityFunction(p, np.asarray(v["re"]) + 1j * np.asarray(v["im"]))
    return DensityFunction(p, np.asarray(v, dtype=float))


def decomposition_to_dict(dec: Decomposition) -> dict:
    out = {
        "format": DECOMP_FORMAT, "p": dec.p, "level": dec.level, "M": dec.M, "epsilon": dec.epsilon,
        "growth": dec.growth, "gamma": list(dec.gamma), "n": dec.n, "gamma_refined": list(dec.gamma_refined),
        "n_refined": dec.n_refined, "lipschitz": dec.lipschitz,
        "f_str": _fn(dec.f_str), "f_sml": _fn(dec.f_sml), "f_unf": _fn(dec.f_unf),
        "phi": None if dec.phi is None else list(dec.phi.freqs),
        "F": dec.F.to_dict() if isinstance(dec.F, TrigPolynomial) else None,
        "log": json.loads(json.dumps(dec.log, default=_default)),
    }
    return out


def decomposition_from_dict(d: dict) -> Decomposition:
    if d.get("format") != DECOMP_FORMAT:
        raise ParseError(f"expected format {DECOMP_FORMAT!r}", 0)
    p = d["p"]
    return Decomposition(
        f_str=_unfn(p, d["f_str"]), f_sml=_unfn(p, d["f_sml"]), f_unf=_unfn(p, d["f_unf"]),
        M=d["M"], level=d["level"], epsilon=d["epsilon"], growth=d["growth"], gamma=tuple(d["gamma"]),
        n=d["n"], gamma_refined=tuple(d["gamma_refined"]), n_refined=d["n_refined"],
        phi=None if d["phi"] is None else TorusHom(p, tuple(d["phi"])),
        F=None if d["F"] is None else TrigPolynomial.from_dict(d["F"]),
        lipschitz=d["lipschitz"], log=d["log"])


def load_decomposition(data: bytes | str) -> Decomposition:
    obj, _ = parse_json(data)
    if isinstance(obj, dict) and "result" in obj and "kind" in obj:
        obj = obj["result"]
    return decomposition_from_dict(obj)
