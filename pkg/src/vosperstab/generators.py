"""Seeded test-set families; every result carries its provenance."""
from __future__ import annotations

import numpy as np

from .errors import PreconditionError
from .fourier import check_modulus
from .io import SetRecord
from .torus import TorusHom
from .vosper import ArithmeticProgression, ResidueSet, bohr_set

KINDS = ("ap", "ap-plus-noise", "union-two-aps", "bohr-sample", "random")


def _record(S: ResidueSet, kind: str, seed, params: dict) -> SetRecord:
    return SetRecord.from_set(S, {"generator": kind, "seed": seed, "params": params})


def ap(p: int, start: int = 0, diff: int = 1, length: int = 1, seed=None) -> SetRecord:
    S = ArithmeticProgression(p, start, diff, length).as_set()
    return _record(S, "ap", seed, {"start": start, "diff": diff, "length": length})


def ap_plus_noise(p: int, length: int, outliers: int, start: int = 0, diff: int = 1, seed: int = 0) -> SetRecord:
    """A progression plus outliers drawn from the middle half of its complement (in progression coordinates)."""
    check_modulus(p)
    gap = p - length
    if outliers > gap // 2:
        raise PreconditionError("too many outliers for the complement")
    lo = length + gap // 4
    hi = max(lo + outliers, length + (3 * gap) // 4)
    rng = np.random.default_rng(seed)
    pos = rng.choice(np.arange(lo, hi), size=outliers, replace=False) if outliers else []
    base = [(start + i * diff) % p for i in range(length)]
    extra = [(start + int(i) * diff) % p for i in pos]
    return _record(ResidueSet(p, base + extra), "ap-plus-noise", seed,
                   {"start": start, "diff": diff, "length": length, "outliers": outliers})


def union_two_aps(p: int, length1: int, diff1: int, length2: int, diff2: int, start2: int = 0,
                  start1: int = 0, seed=None) -> SetRecord:
    a = ArithmeticProgression(p, start1, diff1, length1).as_set()
    b = ArithmeticProgression(p, start2, diff2, length2).as_set()
    return _record(a | b, "union-two-aps", seed, {"start1": start1, "diff1": diff1, "length1": length1,
                                                   "start2": start2, "diff2": diff2, "length2": length2})


def bohr_sample(p: int, freqs, radius: float, seed=None) -> SetRecord:
    S = bohr_set(TorusHom(p, tuple(freqs)), radius)
    return _record(S, "bohr-sample", seed, {"freqs": [int(r) for r in freqs], "radius": radius})


def random_set(p: int, density: float, seed: int = 0) -> SetRecord:
    """Uniform random subset of exact size round(density * p)."""
    check_modulus(p)
    if not 0 <= density <= 1:
        raise PreconditionError("density must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    k = int(round(density * p))
    S = ResidueSet(p, tuple(rng.choice(p, size=k, replace=False).tolist()))
    return _record(S, "random", seed, {"density": density})


def generate(kind: str, p: int, seed=0, **params) -> SetRecord:
    if kind == "ap":
        return ap(p, seed=seed, **params)
    if kind == "ap-plus-noise":
        return ap_plus_noise(p, seed=seed, **params)
    if kind == "union-two-aps":
        return union_two_aps(p, seed=seed, **params)
    if kind == "bohr-sample":
        return bohr_sample(p, seed=seed, **params)
    if kind == "random":
        return random_set(p, seed=seed, **params)
    raise PreconditionError(f"unknown generator {kind!r}; choose from {', '.join(KINDS)}")
