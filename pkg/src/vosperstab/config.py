"""Central tolerances and safety caps."""
from __future__ import annotations

from dataclasses import dataclass, field, asdict


@dataclass(frozen=True)
class Tolerances:
    parseval: float = 1e-10
    convolution: float = 1e-10
    inverse: float = 1e-10
    lemma_slack: float = 1e-12
    fast_vs_reference: float = 1e-9
    decomposition_sum: float = 1e-10
    value_range: float = 1e-12
    real_imag: float = 1e-12
    torus_range: float = 1e-9
    pointwise: float = 1e-10
    report_flags: float = 1e-12


@dataclass(frozen=True)
class Caps:
    max_gamma: int = 10_000
    max_n: int = 10**15
    max_outer: int = 10_000
    max_uniformize_steps: int = 100_000
    term_cap: int = 10**7
    box_cap: int = 10**7
    K_max: int = 4096
    grid_cells: int = 1 << 22
    max_escalations: int = 8
    quadrature_points: int = 4096


@dataclass(frozen=True)
class Config:
    tol: Tolerances = field(default_factory=Tolerances)
    caps: Caps = field(default_factory=Caps)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        d = d or {}
        return cls(tol=Tolerances(**d.get("tol", {})), caps=Caps(**d.get("caps", {})))


DEFAULT = Config()
