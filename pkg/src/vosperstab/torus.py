"""Functions on the torus T^d: Fejer kernels, grid functions, smoothing, equidistribution."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .config import DEFAULT, Config
from .errors import BoundViolation, CapExceeded, ModulusTooSmall, NotIndependent, PreconditionError
from .fourier import check_modulus


def torus_dist(t):
    """Distance to the nearest integer, componentwise."""
    t = np.asarray(t, dtype=float)
    return np.abs(t - np.round(t))


@dataclass(frozen=True)
class TorusHom:
    """phi(x) = (r_1 x/p, ..., r_d x/p) mod 1."""

    p: int
    freqs: tuple

    def __post_init__(self):
        check_modulus(self.p)
        object.__setattr__(self, "freqs", tuple(int(r) % self.p for r in self.freqs))

    @property
    def d(self) -> int:
        return len(self.freqs)

    def residues(self, x=None) -> np.ndarray:
        """Integer numerators (r_j x mod p), shape (N, d)."""
        x = np.arange(self.p, dtype=np.int64) if x is None else np.asarray(x, dtype=np.int64)
        r = np.asarray(self.freqs, dtype=np.int64)
        return (np.outer(x, r)) % self.p

    def __call__(self, x=None) -> np.ndarray:
        return self.residues(x) / self.p


def _box(d: int, K: int) -> np.ndarray:
    """All multi-indices k with |k_j| < K, shape ((2K-1)^d, d)."""
    if d == 0:
        return np.zeros((1, 0), dtype=np.int64)
    r = np.arange(-K + 1, K, dtype=np.int64)
    grids = np.meshgrid(*([r] * d), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1)


class TrigPolynomial:
    """F(t) = sum_k c_k exp(2 pi i k.t) over a finite set of integer frequencies."""

    def __init__(self, d: int, freqs, coeffs, K: int | None = None):
        coeffs = np.asarray(coeffs, dtype=complex).reshape(-1)
        freqs = np.asarray(freqs, dtype=np.int64).reshape(len(coeffs) if d == 0 else -1, d)
        if len(freqs) != len(coeffs):
            raise PreconditionError("frequency and coefficient counts differ")
        self.d = d
        self.freqs = freqs
        self.coeffs = coeffs
        self.K = K

    @classmethod
    def constant(cls, d: int, c: float) -> "TrigPolynomial":
        return cls(d, np.zeros((1, d), dtype=np.int64), [c], K=1)

    def __len__(self):
        return len(self.coeffs)

    def __call__(self, t, chunk: int = 1 << 22) -> np.ndarray:
        t = np.asarray(t, dtype=float).reshape(-1, self.d)
        out = np.empty(len(t))
        step = max(1, chunk // max(1, len(self.coeffs)))
        for s in range(0, len(t), step):
            ph = t[s:s + step] @ self.freqs.T.astype(float)
            out[s:s + step] = (np.exp(2j * np.pi * ph) @ self.coeffs).real
        return out

    def at_residues(self, res: np.ndarray, p: int, chunk: int = 1 << 22) -> np.ndarray:
        """Evaluate at the points res/p exactly (phases reduced mod p in integers)."""
        res = np.asarray(res, dtype=np.int64).reshape(-1, self.d)
        out = np.empty(len(res))
        step = max(1, chunk // max(1, len(self.coeffs)))
        fr = self.freqs % p
        for s in range(0, len(res), step):
            ph = (res[s:s + step] @ fr.T) % p
            out[s:s + step] = (np.exp(2j * np.pi * ph / p) @ self.coeffs).real
        return out

    def compose(self, phi) -> np.ndarray:
        """Values F(phi(x)) for all x in Z/pZ: fold frequencies onto k.r mod p, then one inverse FFT."""
        p = phi.p
        r = np.asarray(phi.freqs, dtype=np.int64).reshape(-1)
        if self.d != len(r):
            raise PreconditionError(f"dimension mismatch: F on T^{self.d}, phi into T^{len(r)}")
        m = (self.freqs % p) @ r % p if self.d else np.zeros(len(self.coeffs), dtype=np.int64)
        a = np.zeros(p, dtype=complex)
        np.add.at(a, m, self.coeffs)
        return (np.fft.ifft(a) * p).real

    def integral(self) -> float:
        zero = np.all(self.freqs == 0, axis=1)
        return float(self.coeffs[zero].sum().real)

    def coefficient(self, k) -> complex:
        hit = np.all(self.freqs == np.asarray(k), axis=1)
        return complex(self.coeffs[hit].sum())

    def is_hermitian(self, atol=1e-12) -> bool:
        table = {tuple(k): c for k, c in zip(self.freqs.tolist(), self.coeffs)}
        return all(abs(c - np.conj(table.get(tuple(-v for v in k), 0))) <= atol for k, c in table.items())

    def lipschitz_bound(self) -> float:
        """2*pi*sum |c_k| |k|_1: a Lipschitz constant for the max-norm on T^d."""
        return float(2 * np.pi * np.sum(np.abs(self.coeffs) * np.abs(self.freqs).sum(axis=1)))

    def pullback(self, V: np.ndarray) -> "TrigPolynomial":
        """G(s) = F(V^T s) for an integer (d', d) matrix V; frequencies map k -> V k."""
        V = np.asarray(V, dtype=np.int64)
        new = self.freqs @ V.T
        uniq, inv = np.unique(new, axis=0, return_inverse=True)
        c = np.zeros(len(uniq), dtype=complex)
        np.add.at(c, inv.reshape(-1), self.coeffs)
        keep = np.abs(c) > 0
        return TrigPolynomial(V.shape[0], uniq[keep], c[keep])

    def to_dict(self) -> dict:
        return {"kind": "trig", "d": self.d, "K": self.K, "freqs": self.freqs.tolist(),
                "coeffs": [[float(c.real), float(c.imag)] for c in self.coeffs]}

    @classmethod
    def from_dict(cls, d: dict) -> "TrigPolynomial":
        c = np.array([complex(a, b) for a, b in d["coeffs"]], dtype=complex)
        fr = np.array(d["freqs"], dtype=np.int64).reshape(len(c), d["d"])
        return cls(d["d"], fr, c, d.get("K"))


def fejer_coefficients(d: int, K: int) -> tuple[np.ndarray, np.ndarray]:
    k = _box(d, K)
    w = np.prod(1.0 - np.abs(k) / K, axis=1) if d else np.ones(1)
    return k, w


def fejer_kernel(d: int, K: int, config: Config = DEFAULT) -> TrigPolynomial:
    """Phi_K on T^d: coefficient prod_j (1 - |k_j|/K) at every k with |k_j| < K."""
    if d < 1 or K < 1:
        raise PreconditionError("need d >= 1 and K >= 1")
    terms = (2 * K - 1) ** d
    if terms > config.caps.term_cap:
        raise CapExceeded("term_cap", terms, config.caps.term_cap)
    k, w = fejer_coefficients(d, K)
    return TrigPolynomial(d, k, w.astype(complex), K=K)


def fejer_1d(t, K: int) -> np.ndarray:
    """Closed form (1/K) sin^2(pi K t) / sin^2(pi t), value K at integers."""
    t = np.asarray(t, dtype=float)
    s = np.sin(np.pi * t)
    small = np.abs(s) < 1e-300
    with np.errstate(divide="ignore", invalid="ignore"):
        v = np.sin(np.pi * K * t) ** 2 / (K * s**2)
    return np.where(small, float(K), v)


def fejer_eval(t, K: int) -> np.ndarray:
    """Phi_K at points t of shape (N, d) as the product of 1-d kernels."""
    t = np.atleast_2d(np.asarray(t, dtype=float))
    return np.prod(fejer_1d(t, K), axis=1)


def fejer_box_mass(d: int, K: int, lam: float) -> float:
    """Exact integral of Phi_K over [-lam, lam]^d."""
    k = np.arange(1, K)
    one = 2 * lam + np.sum((1 - k / K) * np.sin(2 * np.pi * k * lam) / (np.pi * k)) * 2
    return float(one**d)


def fejer_concentration_bound(d: int, K: int, lam: float) -> float:
    return 1 - d / (4 * K * lam**2)


def fejer_lipschitz_formula(d: int, K: int) -> float:
    return 2 * math.pi / 3 * d * K ** (d - 1) * (K**2 - 1)


def fejer_lipschitz_sum(d: int, K: int) -> float:
    """2 pi sum_k |k|_1 prod_j (1 - |k_j|/K), evaluated term by term."""
    k, w = fejer_coefficients(d, K)
    return float(2 * math.pi * np.sum(np.abs(k).sum(axis=1) * w))


def fejer_mass_sum(d: int, K: int) -> float:
    return float(fejer_coefficients(d, K)[1].sum())


class GridFunction:
    """F' constant on the cubes prod_j [k_j/n, (k_j+1)/n).

    Stored sparsely: explicit values on listed cells, ``fill`` elsewhere.
    """

    def __init__(self, d: int, n: int, cells, values, fill: float = 0.0):
        cells = np.asarray(cells, dtype=np.int64).reshape(-1, d)
        values = np.asarray(values, dtype=float).reshape(-1)
        if len(cells) != len(values):
            raise PreconditionError("cells and values differ in length")
        if np.any(cells < 0) or np.any(cells >= n):
            raise PreconditionError("cell index out of range")
        lo, hi = min([fill, *values.tolist()]), max([fill, *values.tolist()])
        if lo < -1e-12 or hi > 1 + 1e-12:
            raise PreconditionError("grid values must lie in [0, 1]")
        self.d, self.n, self.cells, self.values, self.fill = d, int(n), cells, values, float(fill)
        self._dense = None
        self._index = None

    @classmethod
    def from_dense(cls, arr) -> "GridFunction":
        arr = np.asarray(arr, dtype=float)
        d, n = arr.ndim, arr.shape[0]
        cells = np.stack(np.unravel_index(np.arange(arr.size), arr.shape), axis=1)
        out = cls(d, n, cells, arr.ravel(), fill=0.0)
        out._dense = arr
        return out

    def sup(self) -> float:
        return max([abs(self.fill), *np.abs(self.values).tolist()])

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float).reshape(-1, self.d)
        c = np.floor(np.mod(t, 1.0) * self.n).astype(np.int64) % self.n
        if self._dense is not None:
            return self._dense[tuple(c.T)]
        if self._index is None:
            self._index = {tuple(k): v for k, v in zip(self.cells.tolist(), self.values.tolist())}
        return np.array([self._index.get(tuple(row), self.fill) for row in c.tolist()])

    def integral(self) -> float:
        vol = float(self.n) ** (-self.d)
        return self.fill + float(np.sum(self.values - self.fill)) * vol

    def fourier(self, freqs: np.ndarray, chunk: int = 1 << 22, dense_limit: int = 1 << 22) -> np.ndarray:
        """Exact Fourier coefficients int F'(t) exp(-2 pi i k.t) dt at the given k.

        The cell sum is n-periodic in k, so when n^d is small it comes from one fftn.
        """
        freqs = np.asarray(freqs, dtype=np.int64).reshape(-1, self.d)
        n = self.n
        k = freqs
        with np.errstate(divide="ignore", invalid="ignore"):
            w = np.where(k == 0, 1.0 / n,
                         (1 - np.exp(-2j * np.pi * (k % n) / n)) / (2j * np.pi * np.where(k == 0, 1, k)))
        weight = np.prod(w, axis=1) if self.d else np.ones(len(k))
        delta = self.values - self.fill
        if self.d and n**self.d <= dense_limit and len(k) * len(self.cells) > n**self.d:
            if self._dense is not None:
                dense = self._dense - self.fill
            else:
                dense = np.zeros((n,) * self.d)
                dense[tuple(self.cells.T)] = delta
            out = np.fft.fftn(dense)[tuple((k % n).T)]
        else:
            out = np.zeros(len(k), dtype=complex)
            step = max(1, chunk // max(1, len(self.cells)))
            for s in range(0, len(k), step):
                ph = (k[s:s + step] @ self.cells.T) % n
                out[s:s + step] = np.exp(-2j * np.pi * ph / n) @ delta
        out = out * weight
        out[np.all(k == 0, axis=1)] += self.fill
        return out

    def to_dict(self) -> dict:
        return {"kind": "grid", "d": self.d, "n": self.n, "cells": self.cells.tolist(),
                "values": self.values.tolist(), "fill": self.fill}


def smooth(Fp: GridFunction, K: int, config: Config = DEFAULT) -> TrigPolynomial:
    """F = F' * Phi_K, exact coefficients F'^(k) * prod_j (1 - |k_j|/K)."""
    terms = (2 * K - 1) ** Fp.d
    if terms > config.caps.term_cap:
        raise CapExceeded("term_cap", terms, config.caps.term_cap)
    k, w = fejer_coefficients(Fp.d, K)
    c = Fp.fourier(k) * w
    return TrigPolynomial(Fp.d, k, c, K=K)


def smoothing_lipschitz_bound(d: int, K: int, sup: float = 1.0) -> float:
    """Lipschitz bound 4 d K^(d+1) * sup|F'| for F' * Phi_K."""
    return 4 * d * K ** (d + 1) * sup


def smoothing_error_bound(d: int, n: int, K: int, lam: float) -> float:
    return 4 * lam * d * n + (d / (4 * K * lam**2)) ** 2


def worst_case_smoothing_parameters(eps: float, d: int, n: int) -> tuple[float, int]:
    """lam = eps/(16 d n), K = ceil(d / (2 lam^2 sqrt(eps))); makes the error bound <= eps/2."""
    lam = eps / (16 * d * n)
    return lam, math.ceil(d / (2 * lam**2 * math.sqrt(eps)))


def boundary_count(phi: TorusHom, n: int, lam: float) -> int:
    """#x with ||phi_j(x) - k/n|| <= lam for some j and integer k."""
    t = phi()
    near = torus_dist(t * n) <= lam * n
    return int(np.any(near, axis=1).sum())


def smoothing_error(Fp: GridFunction, K: int, lam: float, phi: TorusHom, config: Config = DEFAULT) -> float:
    """||F'(phi) - (F' * Phi_K)(phi)||_2^2 over Z/pZ, asserted against 4 lam d n + (d/(4 K lam^2))^2."""
    d, n, p = Fp.d, Fp.n, phi.p
    if phi.d != d:
        raise PreconditionError("dimension mismatch between F' and phi")
    if not 0 < lam < 1 / (2 * n):
        raise PreconditionError(f"lam must lie in (0, 1/(2n)) = (0, {1 / (2 * n)})")
    F = smooth(Fp, K, config)
    t = phi()
    err = float(np.mean((Fp(t) - F.at_residues(phi.residues(), p)) ** 2))
    bad = boundary_count(phi, n, lam)
    if bad > 4 * lam * d * n * p:
        raise ModulusTooSmall(f"p too small for this (lam, n, d): {bad} boundary points > {4 * lam * d * n * p:.3f}")
    bound = smoothing_error_bound(d, n, K, lam)
    if err > bound + config.tol.lemma_slack:
        raise BoundViolation("smoothing error", err, bound)
    return err


def equidistribution_gap(F, phi: TorusHom, M: float, K: int, integral: float | None = None,
                         config: Config = DEFAULT) -> float:
    """|E_x F(phi(x)) - int F|, asserted to be at most M / sqrt(K) for K-independent phi.

    F is a TrigPolynomial, GridFunction or a callable on (N, d) arrays; for a bare
    callable the exact integral must be supplied.
    """
    from .lattice import find_relation

    rel = find_relation(phi, K, config=config)
    if rel is not None:
        raise NotIndependent(rel)
    if isinstance(F, TrigPolynomial):
        mean = float(F.at_residues(phi.residues(), phi.p).mean())
        exact = F.integral() if integral is None else integral
    elif isinstance(F, GridFunction):
        mean = float(F(phi()).mean())
        exact = F.integral() if integral is None else integral
    else:
        if integral is None:
            raise PreconditionError("callable F needs an explicit integral")
        mean = float(np.real(np.mean(F(phi()))))
        exact = integral
    gap = abs(mean - exact)
    bound = M / math.sqrt(K)
    if gap > bound + config.tol.lemma_slack:
        raise BoundViolation("equidistribution gap", gap, bound)
    return gap


def midpoint_grid(d: int, N: int) -> np.ndarray:
    """Midpoints of an N^d tensor grid on [-1/2, 1/2)^d, shape (N^d, d)."""
    x = (np.arange(N) + 0.5) / N - 0.5
    if d == 1:
        return x[:, None]
    g = np.meshgrid(*([x] * d), indexing="ij")
    return np.stack([a.ravel() for a in g], axis=1)


def quad_torus(fn: Callable, d: int, N: int) -> float:
    """Tensor midpoint rule on T^d."""
    return float(np.mean(fn(midpoint_grid(d, N))))


def tent(center, slope: float):
    """max(0, 1 - slope * ||t - center||), slope-Lipschitz; exact integral 2^d/((d+1) slope^d) for slope >= 2."""
    center = np.asarray(center, dtype=float)
    d = len(center)

    def F(t):
        t = np.asarray(t, dtype=float).reshape(-1, d)
        return np.maximum(0.0, 1 - slope * torus_dist(t - center).max(axis=1))

    return F, 2.0**d / ((d + 1) * slope**d)


def sample_lipschitz(F, d: int, n_pairs: int = 2000, seed: int = 0) -> float:
    """Empirical lower estimate of the Lipschitz constant from random close pairs."""
    rng = np.random.default_rng(seed)
    a = rng.random((n_pairs, d))
    h = rng.normal(scale=1e-4, size=(n_pairs, d))
    num = np.abs(F(a + h) - F(a))
    den = np.abs(h).max(axis=1)
    return float(np.max(num / den))


def multi_indices(d: int, K: int):
    return itertools.product(range(-K + 1, K), repeat=d)
