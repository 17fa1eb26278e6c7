"""Normalized Fourier analysis on Z/pZ.

Convention (fixed everywhere in the package)::

    f_hat(r) = (1/p) * sum_x f(x) * exp(-2*pi*i*r*x/p)

so that Parseval reads ``sum_r |f_hat(r)|^2 = E_x |f(x)|^2`` and
``(f*g)(x) = E_y f(y) g(x-y)`` has ``(f*g)^ = f_hat * g_hat``.
Inner products are ``<f, g> = E_x f(x) conj(g(x))``, hence
``f_hat(r) = <f, chi_r>`` with ``chi_r(x) = exp(2*pi*i*r*x/p)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .config import DEFAULT
from .errors import PreconditionError


@lru_cache(maxsize=4096)
def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def check_modulus(p) -> int:
    if not isinstance(p, (int, np.integer)) or not is_prime(int(p)):
        raise PreconditionError(f"modulus must be prime, got {p!r}")
    return int(p)


class DensityFunction:
    """A function Z/pZ -> C stored as a length-p array (real dtype when possible)."""

    __slots__ = ("p", "values")

    def __init__(self, p, values):
        p = check_modulus(p)
        v = np.asarray(values)
        if v.shape != (p,):
            raise PreconditionError(f"expected {p} values, got shape {v.shape}")
        if np.iscomplexobj(v):
            if np.all(np.abs(v.imag) <= DEFAULT.tol.real_imag):
                v = v.real.astype(float)
            else:
                v = v.astype(complex)
        else:
            v = v.astype(float)
        v.setflags(write=False)
        self.p = p
        self.values = v

    @classmethod
    def indicator(cls, p, members):
        v = np.zeros(p)
        v[np.asarray(list(members), dtype=np.int64) % p] = 1.0
        return cls(p, v)

    @classmethod
    def constant(cls, p, c):
        return cls(p, np.full(p, c))

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.values)

    def mean(self):
        return self.values.mean()

    def _coerce(self, other):
        if isinstance(other, DensityFunction):
            if other.p != self.p:
                raise PreconditionError(f"moduli differ: {self.p} vs {other.p}")
            return other.values
        return other

    def __add__(self, other):
        return DensityFunction(self.p, self.values + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return DensityFunction(self.p, self.values - self._coerce(other))

    def __rsub__(self, other):
        return DensityFunction(self.p, self._coerce(other) - self.values)

    def __mul__(self, other):
        return DensityFunction(self.p, self.values * self._coerce(other))

    __rmul__ = __mul__

    def __neg__(self):
        return DensityFunction(self.p, -self.values)

    def __len__(self):
        return self.p

    def __repr__(self):
        return f"DensityFunction(p={self.p}, real={self.is_real})"

    def allclose(self, other, atol=1e-10) -> bool:
        return self.p == other.p and np.allclose(self.values, other.values, rtol=0, atol=atol)


@dataclass(frozen=True)
class Spectrum:
    p: int
    coeffs: np.ndarray

    def inverse(self) -> DensityFunction:
        return DensityFunction(self.p, np.fft.ifft(self.coeffs) * self.p)

    def energy(self) -> float:
        return float(np.sum(np.abs(self.coeffs) ** 2))

    def __getitem__(self, r):
        return self.coeffs[r]


def _character_matrix(p: int, sign: int) -> np.ndarray:
    rx = np.outer(np.arange(p), np.arange(p)) % p
    return np.exp(sign * 2j * np.pi * rx / p)


def dft(f: DensityFunction, method: str = "fft") -> Spectrum:
    """Normalized transform. ``method="direct"`` is the O(p^2) reference sum."""
    p = f.p
    if method == "direct":
        coeffs = _character_matrix(p, -1) @ f.values / p
    elif method == "fft":
        # pocketfft handles prime lengths via Bluestein
        coeffs = np.fft.fft(f.values) / p
    else:
        raise PreconditionError(f"unknown transform method {method!r}")
    return Spectrum(p, coeffs)


def idft(s: Spectrum, method: str = "fft") -> DensityFunction:
    if method == "direct":
        return DensityFunction(s.p, _character_matrix(s.p, 1) @ s.coeffs)
    return s.inverse()


def inner(f: DensityFunction, g: DensityFunction) -> complex:
    if f.p != g.p:
        raise PreconditionError(f"moduli differ: {f.p} vs {g.p}")
    return complex(np.mean(f.values * np.conj(g.values)))


def character(p: int, r: int) -> DensityFunction:
    x = np.arange(p)
    return DensityFunction(p, np.exp(2j * np.pi * ((r * x) % p) / p))


def convolve(f: DensityFunction, g: DensityFunction) -> DensityFunction:
    """``(f*g)(x) = E_y f(y) g(x-y)``."""
    if f.p != g.p:
        raise PreconditionError(f"moduli differ: {f.p} vs {g.p}")
    out = np.fft.ifft(np.fft.fft(f.values) * np.fft.fft(g.values)) / f.p
    if f.is_real and g.is_real:
        out = out.real
        if np.all(f.values >= 0) and np.all(g.values >= 0):
            out = np.maximum(out, 0.0)
    return DensityFunction(f.p, out)


def u2_norm(f: DensityFunction) -> float:
    c = np.abs(dft(f).coeffs)
    return float(np.sum(c**4) ** 0.25)


def lp_norm(f: DensityFunction, which=2) -> float:
    a = np.abs(f.values)
    if which == 1:
        return float(a.mean())
    if which == 2:
        return float(np.sqrt(np.mean(a**2)))
    if which in (np.inf, "inf", "sup"):
        return float(a.max())
    raise PreconditionError(f"unsupported norm {which!r}")


def max_coefficient(f: DensityFunction, exclude_zero: bool = False, method: str = "fft") -> float:
    c = np.abs(dft(f, method).coeffs)
    if exclude_zero:
        c = c[1:]
    return float(c.max()) if c.size else 0.0
