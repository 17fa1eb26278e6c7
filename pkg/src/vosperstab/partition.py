"""Pre-character cell partitions, conditional expectation, uniformization, baby regularity."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .config import DEFAULT, Config
from .decomposition import Decomposition
from .errors import BoundViolation, CapExceeded, PreconditionError
from .fourier import DensityFunction, dft, inner, character, lp_norm
from .growth import GrowthFunction


@dataclass(frozen=True)
class PreCharacter:
    """phi_r(x) = (r*x mod p)/p in the torus."""

    p: int
    r: int

    def __post_init__(self):
        if not 0 <= self.r < self.p:
            raise PreconditionError(f"frequency {self.r} not in [0, {self.p})")

    def __call__(self, x):
        return ((self.r * np.asarray(x, dtype=np.int64)) % self.p) / self.p

    def character(self) -> DensityFunction:
        return character(self.p, self.r)


def _cell_coords(p: int, r: int, n: int) -> np.ndarray:
    """floor(n * phi_r(x)) for every x, in exact integer arithmetic."""
    res = (r * np.arange(p, dtype=np.int64)) % p
    if n * p < 2**62:
        return (n * res) // p
    return np.array([(n * int(v)) // p for v in res], dtype=object)


@dataclass(frozen=True)
class CellPartition:
    """B(Gamma, n): x ~ y iff floor(n*phi(x)) == floor(n*phi(y)) for every phi in Gamma."""

    p: int
    gamma: tuple = ()
    n: int = 1

    def __post_init__(self):
        object.__setattr__(self, "gamma", tuple(int(r) for r in self.gamma))
        if self.n < 1:
            raise PreconditionError("grid resolution must be positive")
        for r in self.gamma:
            if not 0 <= r < self.p:
                raise PreconditionError(f"frequency {r} not in [0, {self.p})")

    @cached_property
    def keys(self) -> np.ndarray:
        """(p, |Gamma|) array of cell coordinates."""
        if not self.gamma:
            return np.zeros((self.p, 0), dtype=np.int64)
        return np.stack([_cell_coords(self.p, r, self.n) for r in self.gamma], axis=1)

    @cached_property
    def labels(self) -> np.ndarray:
        if not self.gamma:
            return np.zeros(self.p, dtype=np.int64)
        keys = self.keys
        if keys.dtype == object:
            table = {}
            return np.array([table.setdefault(tuple(k), len(table)) for k in keys], dtype=np.int64)
        _, inv = np.unique(keys, axis=0, return_inverse=True)
        return inv.reshape(-1).astype(np.int64)

    @property
    def num_cells(self) -> int:
        return int(self.labels.max()) + 1

    def cell_of(self, x: int) -> tuple:
        return tuple(int(k) for k in self.keys[x])

    def refines(self, other: "CellPartition") -> bool:
        """True iff every cell of self lies inside a cell of other (checked on labels)."""
        seen = {}
        for a, b in zip(self.labels, other.labels):
            if seen.setdefault(a, b) != b:
                return False
        return True

    def refine(self, extra=(), factor: int = 1) -> "CellPartition":
        g = list(self.gamma) + [r for r in extra if r not in self.gamma]
        return CellPartition(self.p, tuple(g), self.n * factor)


def conditional_expectation(f: DensityFunction, B: CellPartition) -> DensityFunction:
    """Average of f over the cell of B containing x."""
    if f.p != B.p:
        raise PreconditionError(f"moduli differ: {f.p} vs {B.p}")
    lab = B.labels
    counts = np.bincount(lab)
    v = f.values
    sums = np.bincount(lab, weights=v.real)
    if np.iscomplexobj(v):
        sums = sums + 1j * np.bincount(lab, weights=v.imag)
    return DensityFunction(f.p, sums[lab] / counts[lab])


def energy(f: DensityFunction) -> float:
    return lp_norm(f, 2) ** 2


def coefficient_bound_check(f: DensityFunction, B: CellPartition, r: int, config: Config = DEFAULT) -> float:
    """|<f - E(f|B), chi_r>|, asserted to be at most 2*pi/n."""
    if r not in B.gamma:
        raise PreconditionError(f"frequency {r} is not in Gamma {B.gamma}")
    if lp_norm(f, np.inf) > 1 + config.tol.value_range:
        raise PreconditionError("need sup-norm at most 1")
    val = abs(inner(f - conditional_expectation(f, B), character(f.p, r)))
    bound = 2 * math.pi / B.n
    if val > bound + config.tol.lemma_slack:
        raise BoundViolation("cell-coefficient bound", val, bound)
    return val


@dataclass
class UniformizeResult:
    partition: CellPartition
    added: list = field(default_factory=list)
    energies: list = field(default_factory=list)
    gains: list = field(default_factory=list)
    delta: float = 0.0
    residual_max: float = 0.0
    abs_n_bound: float = 0.0
    rel_n_bound: int = 0


def _largest_coefficient(g: DensityFunction) -> tuple[int, float]:
    c = np.abs(dft(g).coeffs)
    c[0] = -1.0
    # argmax returns the first index on ties: smallest frequency wins
    r = int(np.argmax(c))
    return r, float(c[r])


def uniformize(f: DensityFunction, delta: float, base: CellPartition | None = None,
               config: Config = DEFAULT) -> UniformizeResult:
    """Grow Gamma until every nontrivial coefficient of f - E(f|B) is at most delta.

    With ``base`` the result refines it: Gamma contains base.gamma and n is
    base.n * ceil(4*pi/delta).
    """
    if not 0 < delta <= 1:
        raise PreconditionError(f"delta must be in (0, 1], got {delta}")
    if lp_norm(f, np.inf) > 1 + config.tol.value_range:
        raise PreconditionError("need sup-norm at most 1")
    p = f.p
    base = base or CellPartition(p)
    if base.p != p:
        raise PreconditionError("base partition has a different modulus")
    step = math.ceil(4 * math.pi / delta)
    n = base.n * step
    if n > config.caps.max_n:
        raise CapExceeded("max_n", n, config.caps.max_n)
    B = CellPartition(p, base.gamma, n)
    E = conditional_expectation(f, B)
    out = UniformizeResult(B, delta=delta, abs_n_bound=16 / delta, rel_n_bound=step)
    out.energies.append(energy(E))
    max_added = math.floor(4 / delta**2)
    while True:
        r, c = _largest_coefficient(f - E)
        if c <= delta:
            out.residual_max = c
            break
        if len(out.added) >= max_added:
            # energy argument forbids this; reaching here means a bug
            raise CapExceeded("uniformize steps", len(out.added) + 1, max_added)
        if len(B.gamma) + 1 > config.caps.max_gamma:
            raise CapExceeded("max_gamma", len(B.gamma) + 1, config.caps.max_gamma)
        B = CellPartition(p, B.gamma + (r,), n)
        E = conditional_expectation(f, B)
        out.added.append(r)
        out.energies.append(energy(E))
        out.gains.append(out.energies[-1] - out.energies[-2])
    out.partition = B
    return out


def _clip01(v: np.ndarray) -> np.ndarray:
    return np.clip(v, 0.0, 1.0)


def baby_arl(f: DensityFunction, epsilon: float, growth: GrowthFunction,
             config: Config = DEFAULT) -> Decomposition:
    """f = E(f|B) + (E(f|B') - E(f|B)) + (f - E(f|B')) with B' refining B."""
    if not 0 < epsilon <= 1:
        raise PreconditionError(f"epsilon must be in (0, 1], got {epsilon}")
    if not f.is_real or f.values.min() < -config.tol.value_range or f.values.max() > 1 + config.tol.value_range:
        raise PreconditionError("baby_arl needs f with values in [0, 1]")
    p = f.p
    B = CellPartition(p)
    E = conditional_expectation(f, B)
    log = {"outer": [], "energies": [energy(E)]}
    cap = min(config.caps.max_outer, math.floor(1 / epsilon**2) + 1)
    for it in range(1, cap + 1):
        M = max(len(B.gamma), B.n)
        gM = growth(M)
        delta = min(1.0, 1.0 / gM)
        u = uniformize(f - E, delta, base=B, config=config)
        B2 = u.partition
        E2 = conditional_expectation(f, B2)
        f_str = DensityFunction(p, _clip01(E.values))
        f_sml = DensityFunction(p, _clip01(E2.values) - f_str.values)
        sml = lp_norm(f_sml, 2)
        log["outer"].append({
            "iteration": it, "M": M, "growth": gM, "delta": delta,
            "gamma": list(B.gamma), "n": B.n, "added": u.added, "n_refined": B2.n,
            "gains": u.gains, "sml_norm": sml,
        })
        if sml <= epsilon:
            f_unf = DensityFunction(p, f.values - f_str.values - f_sml.values)
            return Decomposition(
                f_str=f_str, f_sml=f_sml, f_unf=f_unf, M=float(M), level="baby",
                epsilon=epsilon, growth=growth.describe(), gamma=B.gamma, n=B.n,
                gamma_refined=B2.gamma, n_refined=B2.n, log=log)
        B, E = B2, E2
        log["energies"].append(energy(E))
    raise CapExceeded("outer iterations", cap + 1, cap)
