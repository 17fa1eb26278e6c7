"""Growth functions: increasing maps (0, inf) -> (0, inf) trading complexity for uniformity."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import GrowthOverflow, PreconditionError

FAMILIES = ("affine", "polynomial", "exponential", "ledger")


@dataclass(frozen=True)
class GrowthFunction:
    """A named growth family.

    affine:      a*M + b
    polynomial:  c * M**k
    exponential: c1 * exp(c2*M)
    ledger:      2**12 / (eta*delta*alpha1*lam**2)**2 * (2M/lam)**(2M)
    ``floor`` evaluates at max(M, floor); used when escalating a regularity run.
    """

    family: str = "affine"
    params: dict = field(default_factory=lambda: {"a": 1.0, "b": 15.0})
    floor: float = 0.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise PreconditionError(f"unknown growth family {self.family!r}")

    def log2(self, M: float) -> float:
        M = max(float(M), self.floor)
        q = self.params
        if self.family == "affine":
            v = q["a"] * M + q["b"]
            return math.log2(v) if v > 0 else -math.inf
        if self.family == "polynomial":
            return math.log2(q["c"]) + q["k"] * math.log2(M)
        if self.family == "exponential":
            return math.log2(q["c1"]) + q["c2"] * M / math.log(2)
        lam = q["eta"] * q["delta"] * q["alpha1"] / 4
        return (12 - 2 * math.log2(q["eta"] * q["delta"] * q["alpha1"] * lam**2)
                + 2 * M * math.log2(2 * M / lam))

    def __call__(self, M: float) -> float:
        lg = self.log2(M)
        if lg > 1023:
            raise GrowthOverflow(M, lg)
        return 2.0**lg

    def floored(self, floor: float) -> "GrowthFunction":
        return GrowthFunction(self.family, dict(self.params), max(self.floor, float(floor)))

    def describe(self) -> dict:
        d = {"family": self.family, **self.params}
        if self.floor:
            d["floor"] = self.floor
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "GrowthFunction":
        d = dict(d)
        fam = d.pop("family")
        floor = d.pop("floor", 0.0)
        return cls(fam, d, floor)

    @classmethod
    def affine(cls, a=1.0, b=15.0):
        return cls("affine", {"a": float(a), "b": float(b)})

    @classmethod
    def parse(cls, text: str) -> "GrowthFunction":
        """``"affine:a=1,b=15"`` style description used on the command line."""
        fam, _, rest = text.partition(":")
        params = {}
        for item in filter(None, rest.split(",")):
            k, _, v = item.partition("=")
            params[k.strip()] = float(v)
        if fam == "affine":
            params = {"a": 1.0, "b": 15.0, **params}
        return cls(fam, params)
