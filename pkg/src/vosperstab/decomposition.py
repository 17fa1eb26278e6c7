from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from .fourier import DensityFunction


@dataclass
class Decomposition:
    """f = f_str + f_sml + f_unf with the provenance of f_str.

    Baby level: f_str = E(f | B(gamma, n)); the refined partition is kept too.
    Intermediate/final: f_str = F(phi(x)) with phi a torus homomorphism and F a
    trigonometric polynomial of Lipschitz constant at most ``lipschitz``.
    """

    f_str: DensityFunction
    f_sml: DensityFunction
    f_unf: DensityFunction
    M: float
    level: str
    epsilon: float
    growth: dict
    gamma: tuple = ()
    n: int = 1
    gamma_refined: tuple = ()
    n_refined: int = 1
    phi: Any = None
    F: Any = None
    lipschitz: float | None = None
    log: dict = field(default_factory=dict)

    @property
    def p(self) -> int:
        return self.f_str.p

    @property
    def d(self) -> int:
        return len(self.phi.freqs) if self.phi is not None else len(self.gamma)

    def total(self) -> DensityFunction:
        return self.f_str + self.f_sml + self.f_unf
