"""Independent post-hoc checker for decompositions.

Recomputes every bullet property from scratch: the cell structure by plain dict
grouping, the uniformity bound by the O(p^2) direct transform, independence by
the itertools reference scan. None of the construction code paths are reused.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import DEFAULT, Config
from .decomposition import Decomposition
from .fourier import DensityFunction, dft
from .growth import GrowthFunction
from .lattice import reference_relation_scan
from .torus import TrigPolynomial


@dataclass(frozen=True)
class Check:
    name: str
    ok: bool
    detail: str = ""


def _groupby_expectation(values, p, gamma, n):
    cells = {}
    for x in range(p):
        key = tuple((n * ((r * x) % p)) // p for r in gamma)
        cells.setdefault(key, []).append(x)
    out = np.empty(p, dtype=values.dtype)
    for xs in cells.values():
        out[xs] = values[xs].mean()
    return out


def _eval_trig_direct(F: TrigPolynomial, phi) -> np.ndarray:
    p = phi.p
    out = np.zeros(p)
    for x in range(p):
        t = np.array([(r * x) % p for r in phi.freqs], dtype=np.int64)
        ph = (F.freqs @ t) % p
        out[x] = float(np.sum(F.coeffs * np.exp(2j * np.pi * ph / p)).real)
    return out


def check_decomposition(f: DensityFunction, dec: Decomposition, growth: GrowthFunction | None = None,
                        epsilon: float | None = None, config: Config = DEFAULT,
                        independence: bool | None = None) -> list[Check]:
    growth = growth or GrowthFunction.from_dict(dec.growth)
    eps = dec.epsilon if epsilon is None else epsilon
    tol = config.tol
    p = f.p
    out = []

    total = dec.f_str.values + dec.f_sml.values + dec.f_unf.values
    err = float(np.max(np.abs(total - f.values)))
    out.append(Check("sum identity", err <= tol.decomposition_sum, f"max error {err:.3e}"))

    M = dec.M
    out.append(Check("M positive", M > 0, f"M = {M}"))

    if dec.level == "baby":
        ref = _groupby_expectation(f.values, p, dec.gamma, dec.n)
        e = float(np.max(np.abs(ref - dec.f_str.values)))
        out.append(Check("structured: f_str = E(f|B)", e <= tol.pointwise, f"max error {e:.3e}"))
        size = max(len(dec.gamma), dec.n)
        out.append(Check("structured: |Gamma|, n <= M", size <= M, f"max(|Gamma|, n) = {size}, M = {M}"))
    else:
        F, phi = dec.F, dec.phi
        d = phi.d
        if d == 0:
            vals = np.full(p, F.integral())
        else:
            vals = _eval_trig_direct(F, phi)
        e = float(np.max(np.abs(vals - dec.f_str.values)))
        out.append(Check("structured: f_str = F(phi)", e <= tol.pointwise, f"max error {e:.3e}"))
        out.append(Check("structured: d <= M", d <= M, f"d = {d}, M = {M}"))
        lip = float(2 * math.pi * np.sum(np.abs(F.coeffs) * np.abs(F.freqs).sum(axis=1)))
        out.append(Check("structured: F is M-Lipschitz", lip <= M * (1 + 1e-12),
                         f"coefficient Lipschitz bound {lip:.6g}, M = {M}"))
        if d:
            rng = np.random.default_rng(0)
            pts = rng.random((4096, d))
            fv = F(pts)
            lo, hi = float(fv.min()), float(fv.max())
        else:
            lo = hi = F.integral()
        out.append(Check("structured: F maps into [0,1]", lo >= -tol.torus_range and hi <= 1 + tol.torus_range,
                         f"sampled range [{lo:.3g}, {hi:.3g}]"))
        if independence if independence is not None else dec.level == "final":
            K = math.ceil(growth(M))
            rel = reference_relation_scan(phi, K) if d else None
            out.append(Check("structured: phi is growth(M)-independent", rel is None,
                             f"K = {K}, relation = {rel}"))

    sml = float(np.sqrt(np.mean(np.abs(dec.f_sml.values) ** 2)))
    out.append(Check("small: ||f_sml||_2 <= eps", sml <= eps, f"{sml:.6g} <= {eps}"))

    c = float(np.max(np.abs(dft(dec.f_unf, method="direct").coeffs)))
    bound = 1.0 / growth(M)
    out.append(Check("uniform: |<f_unf, chi>| <= 1/growth(M)", c <= bound + tol.lemma_slack,
                     f"{c:.6g} <= {bound:.6g}"))

    s = dec.f_str.values
    ss = s + dec.f_sml.values
    rt = tol.value_range
    ok = bool(np.all(s >= -rt) and np.all(s <= 1 + rt) and np.all(ss >= -rt) and np.all(ss <= 1 + rt))
    out.append(Check("range: f_str, f_str + f_sml in [0,1]", ok,
                     f"f_str in [{s.min():.3g}, {s.max():.3g}], sum in [{ss.min():.3g}, {ss.max():.3g}]"))

    mu = abs(complex(dec.f_unf.values.mean()))
    out.append(Check("mean of f_unf is 0", mu <= tol.decomposition_sum, f"|mean| = {mu:.3e}"))
    return out


def all_ok(checks) -> bool:
    return all(c.ok for c in checks)
