"""Intermediate and final regularity lemmas built on the baby version.

Desk-scale adaptations (the worst-case constants are never instantiated):
* the Fejer order K is the smallest power-of-two-then-bisected value whose
  measured ||f_str' - F(phi)||_2 is at most eps/2, instead of the a-priori
  ceil(d / (2 lam^2 sqrt(eps))), which is recorded in the log;
* the growth function fed to the baby version is escalated (floored at the
  previous M) until the uniform part meets 1/growth(M) at the final M.
"""
from __future__ import annotations

import logging
import math

import numpy as np
from scipy.spatial import cKDTree

from .config import DEFAULT, Config
from .decomposition import Decomposition
from .errors import CapExceeded, ModulusTooSmall, PreconditionError
from .fourier import DensityFunction, dft
from .growth import GrowthFunction
from .lattice import RelationVector, find_relation, reduce_dimension
from .partition import CellPartition, baby_arl
from .torus import (GridFunction, TorusHom, TrigPolynomial, smooth, smoothing_lipschitz_bound,
                    worst_case_smoothing_parameters)

log = logging.getLogger(__name__)


def grid_from_partition(f_str: DensityFunction, gamma, n: int, config: Config = DEFAULT) -> GridFunction:
    """F' constant on grid cubes with F'(phi(x)) = f_str(x).

    Cubes that no phi(x) reaches copy the nearest occupied cube (torus sup-distance) when the
    dense grid fits under the cap, so smoothing does not drag values toward an arbitrary fill;
    otherwise they take the mean of f_str.
    """
    p = f_str.p
    B = CellPartition(p, gamma, n)
    keys = B.keys
    if keys.dtype == object:
        raise CapExceeded("grid resolution (int64)", n, 2**62 // p)
    lab = B.labels
    first = np.unique(lab, return_index=True)[1]
    cells = keys[first]
    values = np.clip(f_str.values[first], 0.0, 1.0)
    d = len(gamma)
    if n**d <= config.caps.grid_cells:
        tree = cKDTree(cells, boxsize=n)
        allc = np.stack(np.unravel_index(np.arange(n**d), (n,) * d), axis=1)
        _, idx = tree.query(allc, p=np.inf)
        return GridFunction.from_dense(values[idx].reshape((n,) * d))
    return GridFunction(d, n, cells, values, fill=float(np.clip(f_str.values.mean(), 0, 1)))


def _fit_smoothing(Fp: GridFunction, phi: TorusHom, target_vals: np.ndarray, tol: float,
                   config: Config) -> tuple[TrigPolynomial, np.ndarray, int, list]:
    """Smallest K (doubling, then bisection) with ||target - (F' * Phi_K)(phi)||_2 <= tol."""
    trail = []
    cache = {}

    def attempt(K):
        if K not in cache:
            F = smooth(Fp, K, config)
            v = np.clip(F.compose(phi), 0.0, 1.0)
            e = float(np.sqrt(np.mean((target_vals - v) ** 2)))
            trail.append((K, e))
            cache[K] = (F, v, e)
        return cache[K]

    K, lo = 1, 0
    while True:
        if K > config.caps.K_max or (2 * K - 1) ** Fp.d > config.caps.term_cap:
            raise CapExceeded("Fejer order K", K, config.caps.K_max)
        if attempt(K)[2] <= tol:
            break
        lo, K = K, 2 * K
    hi = K
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if attempt(mid)[2] <= tol:
            hi = mid
        else:
            lo = mid
    F, v, _ = attempt(hi)
    return F, v, hi, trail


def _intermediate_once(f: DensityFunction, epsilon: float, growth: GrowthFunction, floor: float,
                       config: Config) -> Decomposition:
    baby = baby_arl(f, epsilon / 2, growth.floored(floor), config)
    p = f.p
    gamma, n = baby.gamma, baby.n
    d = len(gamma)
    phi = TorusHom(p, gamma)
    info = {"baby": baby.log, "baby_M": baby.M, "floor": floor, "d": d, "n": n}
    if d == 0:
        c = float(baby.f_str.values.mean())
        F = TrigPolynomial.constant(0, c)
        vals = np.full(p, c)
        lip = 0.0
        info["K"] = 1
    else:
        Fp = grid_from_partition(baby.f_str, gamma, n, config)
        F, vals, K, trail = _fit_smoothing(Fp, phi, baby.f_str.values, epsilon / 2, config)
        lip = min(F.lipschitz_bound(), smoothing_lipschitz_bound(d, K, Fp.sup()))
        lam_p, K_p = worst_case_smoothing_parameters(epsilon, d, n)
        info.update(K=K, K_trail=trail, worst_case_lambda=lam_p, worst_case_K=K_p)
    f_str = DensityFunction(p, vals)
    f_sml = DensityFunction(p, baby.f_sml.values + baby.f_str.values - vals)
    M = max(float(d), lip, 1.0)
    info["lipschitz"] = lip
    return Decomposition(
        f_str=f_str, f_sml=f_sml, f_unf=baby.f_unf, M=M, level="intermediate", epsilon=epsilon,
        growth=growth.describe(), gamma=gamma, n=n, gamma_refined=baby.gamma_refined,
        n_refined=baby.n_refined, phi=phi, F=F, lipschitz=lip, log=info)


def _uniform_ok(dec: Decomposition, growth: GrowthFunction, config: Config) -> tuple[bool, float, float]:
    c = float(np.max(np.abs(dft(dec.f_unf).coeffs)))
    b = 1.0 / growth(dec.M)
    return c <= b + config.tol.lemma_slack, c, b


def _check_input(f: DensityFunction, epsilon: float, config: Config):
    if not 0 < epsilon <= 1:
        raise PreconditionError(f"epsilon must be in (0, 1], got {epsilon}")
    if not f.is_real or f.values.min() < -config.tol.value_range or f.values.max() > 1 + config.tol.value_range:
        raise PreconditionError("need f with values in [0, 1]")


def intermediate_arl(f: DensityFunction, epsilon: float, growth: GrowthFunction,
                     config: Config = DEFAULT) -> Decomposition:
    """f_str = F(phi) with F Lipschitz on T^d, ||f_sml|| <= eps, f_unf uniform at 1/growth(M)."""
    _check_input(f, epsilon, config)
    floor = 0.0
    history = []
    for _ in range(config.caps.max_escalations):
        dec = _intermediate_once(f, epsilon, growth, floor, config)
        ok, c, b = _uniform_ok(dec, growth, config)
        history.append({"floor": floor, "M": dec.M, "unf_max": c, "bound": b})
        if ok:
            dec.log["escalations"] = history
            return dec
        floor = max(dec.M, floor + 1)
    raise CapExceeded("max_escalations", len(history) + 1, config.caps.max_escalations)


def _make_independent(dec: Decomposition, growth: GrowthFunction, config: Config) -> tuple[Decomposition, list]:
    phi, F, lip = dec.phi, dec.F, dec.lipschitz
    M = dec.M
    d0 = phi.d
    steps = []
    while True:
        K = math.ceil(growth(M))
        rel = find_relation(phi, K, config=config)
        if rel is None:
            break
        if phi.d == 1:
            raise ModulusTooSmall(f"p = {phi.p} too small: one-dimensional phi has relation {rel.k} at K = {K}")
        if len(steps) >= d0:
            raise CapExceeded("reduction steps", len(steps) + 1, d0)
        # only the entries of the relation found matter for the completion, not the search box
        tight = RelationVector(rel.k, max(abs(x) for x in rel.k) + 1)
        red = reduce_dimension(phi, F, tight)
        lip_new = min(red.lipschitz(lip), red.F.lipschitz_bound())
        steps.append({"relation": list(rel.k), "K": K, "d_before": phi.d, "matrix": [list(r) for r in red.matrix.rows],
                      "lipschitz_before": lip, "lipschitz_after": lip_new, "dKM": phi.d * K * M})
        phi, F, lip = red.phi, red.F, lip_new
        M = max(float(phi.d), lip, 1.0)
    out = Decomposition(
        f_str=dec.f_str, f_sml=dec.f_sml, f_unf=dec.f_unf, M=M, level="final", epsilon=dec.epsilon,
        growth=dec.growth, gamma=dec.gamma, n=dec.n, gamma_refined=dec.gamma_refined,
        n_refined=dec.n_refined, phi=phi, F=F, lipschitz=lip, log=dict(dec.log))
    out.log["reductions"] = steps
    return out, steps


def final_arl(f: DensityFunction, epsilon: float, growth: GrowthFunction,
              config: Config = DEFAULT) -> Decomposition:
    """Intermediate decomposition with phi made growth(M)-independent by dimension reduction."""
    _check_input(f, epsilon, config)
    floor = 0.0
    history = []
    for _ in range(config.caps.max_escalations):
        inter = _intermediate_once(f, epsilon, growth, floor, config)
        dec, steps = _make_independent(inter, growth, config)
        ok, c, b = _uniform_ok(dec, growth, config)
        history.append({"floor": floor, "M": dec.M, "unf_max": c, "bound": b, "reductions": len(steps)})
        if ok:
            dec.log["escalations"] = history
            return dec
        floor = max(dec.M, floor + 1)
    raise CapExceeded("max_escalations", len(history) + 1, config.caps.max_escalations)
