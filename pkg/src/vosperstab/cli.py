"""Command-line entry point.

Exit codes: 0 ran (verified or negative result), 1 property violation,
2 usage/config error, 3 cap exceeded.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .arl import final_arl, intermediate_arl
from .checks import all_ok, check_decomposition
from .config import Config
from .errors import BoundViolation, CapExceeded, GrowthOverflow, ParseError, PreconditionError
from .fourier import DensityFunction
from .generators import KINDS, generate
from .growth import GrowthFunction
from .io import SetRecord, decomposition_to_dict, dumps, envelope, parse_json, read_set
from .lattice import RelationVector, bounded_bezout, complete_matrix, find_relation, gcd_all, reduce_dimension
from .oracles import SUITES, run_suite
from .partition import baby_arl
from .torus import (TorusHom, equidistribution_gap, fejer_box_mass, fejer_concentration_bound,
                    fejer_lipschitz_formula, fejer_lipschitz_sum, fejer_mass_sum, tent)
from .vosper import (VerifyConfig, ap_cover, bohr_set, bohr_size_ratio, parameter_ledger, popular_doubling, sumset,
                     verify_theorem)

THREADS_ENV = "VOSPERSTAB_THREADS"
EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_CAP = 0, 1, 2, 3

DEFAULTS = {
    "t": 0.02, "delta": 0.1, "eta": 0.1, "epsilon": 0.25, "lambda": 0.6, "growth": None,
    "alpha_window": [0.02, 0.24], "seed": 0, "level": "final",
}


class UsageError(Exception):
    pass


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated integer list, got {text!r}") from None


def _kv(items) -> dict:
    out = {}
    for item in items or []:
        k, sep, v = item.partition("=")
        if not sep:
            raise UsageError(f"expected key=value, got {item!r}")
        k = k.strip().replace("-", "_")
        if "," in v:
            out[k] = _ints(v)
        else:
            try:
                out[k] = int(v)
            except ValueError:
                try:
                    out[k] = float(v)
                except ValueError:
                    out[k] = v
    return out


def _settings(args) -> dict:
    """Built-in defaults, then the config file, then explicit flags."""
    s = dict(DEFAULTS)
    if getattr(args, "config", None):
        data, _ = parse_json(Path(args.config).read_bytes())
        if not isinstance(data, dict):
            raise UsageError("config file must hold a JSON object")
        s.update(data)
    for k, v in vars(args).items():
        if v is not None and k not in ("func", "config", "cmd"):
            s[k] = v
    return s


def _run_config(s: dict) -> Config:
    return Config.from_dict({"tol": s.get("tol", {}), "caps": s.get("caps", {})})


def _growth(s: dict) -> GrowthFunction | None:
    g = s.get("growth")
    if g is None:
        return None
    return GrowthFunction.from_dict(g) if isinstance(g, dict) else GrowthFunction.parse(g)


def _load_set(s: dict) -> SetRecord:
    if s.get("set"):
        return read_set(s["set"])
    if s.get("gen"):
        if not s.get("p"):
            raise UsageError("--gen needs -p")
        return generate(s["gen"], int(s["p"]), seed=s.get("seed", 0), **_kv(s.get("gen_param")))
    raise UsageError("give a set with --set FILE or --gen KIND")


def _emit(s: dict, kind: str, payload: dict, seed=None):
    env = envelope(kind, payload, {k: v for k, v in s.items() if k != "out"}, seed)
    text = dumps(env)
    if s.get("out"):
        Path(s["out"]).write_text(text)
    if s.get("json"):
        sys.stdout.write(text)


def _set_args(sp):
    sp.add_argument("--set", help="SetRecord JSON file")
    sp.add_argument("--gen", choices=KINDS, help="generate the set instead of reading it")
    sp.add_argument("--gen-param", action="append", metavar="KEY=VALUE", help="generator parameter (repeatable)")
    sp.add_argument("-p", type=int)


def _common(sp):
    sp.add_argument("--config", help="JSON file overriding defaults")
    sp.add_argument("--out", help="write the JSON record here")
    sp.add_argument("--json", action="store_true", default=None, help="print the JSON record to stdout")
    sp.add_argument("--seed", type=int)


# subcommands ---------------------------------------------------------------

def cmd_decompose(s) -> int:
    cfg = _run_config(s)
    if s.get("constant") is not None:
        p = int(s.get("p") or 0)
        if not p:
            raise UsageError("--constant needs -p")
        f = DensityFunction.constant(p, float(s["constant"]))
    else:
        f = _load_set(s).residue_set().indicator()
    g = _growth(s) or GrowthFunction.affine(1, 15)
    eps = float(s["epsilon"])
    fn = {"baby": baby_arl, "intermediate": intermediate_arl, "final": final_arl}[s["level"]]
    dec = fn(f, eps, g, cfg)
    checks = check_decomposition(f, dec, g, eps, cfg)
    print(f"level={dec.level} M={dec.M:.6g} d={dec.d} n={dec.n} |Gamma|={len(dec.gamma)}")
    energies = dec.log.get("energies") or dec.log.get("baby", {}).get("energies")
    if energies and len(energies) > 1:
        print("energy trajectory: " + " ".join(f"{e:.6g}" for e in energies))
    for c in checks:
        if not c.ok:
            print(f"FAILED {c.name}: {c.detail}")
    payload = decomposition_to_dict(dec)
    payload["checks"] = [{"name": c.name, "ok": c.ok, "detail": c.detail} for c in checks]
    _emit(s, "decomposition", payload, s.get("seed"))
    return EXIT_OK if all_ok(checks) else EXIT_VIOLATION


def cmd_verify(s) -> int:
    rec = _load_set(s)
    vc = VerifyConfig(epsilon=float(s["epsilon"]), lam=float(s["lambda"]), growth=_growth(s),
                      alpha_window=tuple(s["alpha_window"]), run=_run_config(s))
    rep = verify_theorem(rec.residue_set(), float(s["t"]), float(s["delta"]), float(s["eta"]), vc)
    print(f"status: {rep.status}")
    print(f"hypothesis: E min(1A*1A, t) = {rep.hypothesis_value:.6g}  vs  (2+delta) alpha t = "
          f"{rep.hypothesis_threshold:.6g}")
    if rep.P is not None:
        print(f"P: start={rep.P.start} diff={rep.P.diff} length={rep.P.length}  |A\\P|={rep.A_minus_P}  "
              f"|P\\A|={rep.P_minus_A}  C_emp={rep.C_emp:.6g}")
    print(rep.table())
    for f in rep.flags:
        print(f"note: {f}")
    payload = rep.to_dict()
    payload["set"] = rec.to_dict()
    _emit(s, "verification", payload, s.get("seed"))
    return EXIT_OK


def cmd_ap_cover(s) -> int:
    S = _load_set(s).residue_set()
    P = ap_cover(S)
    ok = P.contains_set(S)
    print(f"start={P.start} diff={P.diff} length={P.length} covers={ok}")
    _emit(s, "ap-cover", {"start": P.start, "diff": P.diff, "length": P.length, "covers": ok}, s.get("seed"))
    return EXIT_OK if ok else EXIT_VIOLATION


def cmd_bohr(s) -> int:
    phi = TorusHom(int(s["p"]), tuple(s["freqs"]))
    B = bohr_set(phi, float(s["radius"]))
    ratio, lower = bohr_size_ratio(B, float(s["radius"]), phi.d)
    print(f"|B| = {len(B)}  |B|/p = {ratio:.6g}  radius^d = {lower:.6g}")
    rec = SetRecord.from_set(B, {"generator": "bohr-sample", "seed": None,
                                 "params": {"freqs": list(phi.freqs), "radius": float(s["radius"])}})
    _emit(s, "set", rec.to_dict())
    return EXIT_OK if ratio >= lower else EXIT_VIOLATION


def cmd_sumset(s) -> int:
    S = _load_set(s).residue_set()
    SS = sumset(S)
    cd = min(2 * len(S) - 1, S.p)
    print(f"|S| = {len(S)}  |S+S| = {len(SS)}  Cauchy-Davenport bound {cd}")
    _emit(s, "set", SetRecord.from_set(SS, {"generator": "sumset", "seed": None, "params": {}}).to_dict())
    return EXIT_OK if len(SS) >= cd else EXIT_VIOLATION


def cmd_popdouble(s) -> int:
    S = _load_set(s).residue_set()
    ts = sorted(s.get("thresholds") or [float(s["t"])])
    rows = []
    for t in ts:
        v = popular_doubling(S, t)
        rows.append({"t": t, "value": v, "threshold": (2 + float(s["delta"])) * S.density * t})
        print(f"t={t:<10g} E min(1A*1A, t) = {v:.6g}   (2+delta) alpha t = {rows[-1]['threshold']:.6g}")
    vals = [r["value"] for r in rows]
    mono = all(a <= b + 1e-15 for a, b in zip(vals, vals[1:]))
    _emit(s, "popular-doubling", {"rows": rows}, s.get("seed"))
    return EXIT_OK if mono else EXIT_VIOLATION


def cmd_complete_matrix(s) -> int:
    a = s["a"]
    A = complete_matrix(a)
    for r in A.rows:
        print(" ".join(f"{x:>4d}" for x in r))
    D = A.det()
    want = sum(x * x for x in a) // gcd_all(a)
    orth = all(sum(x * y for x, y in zip(a, r)) == 0 for r in A.rows[1:])
    print(f"det = {D} (sum a^2 / gcd = {want})  orthogonal = {orth}  max entry = {A.max_entry()}")
    _emit(s, "matrix", {"a": a, "rows": [list(r) for r in A.rows], "det": D})
    ok = orth and (D == want or (len(a) == 1 and D == a[0]))
    return EXIT_OK if ok else EXIT_VIOLATION


def cmd_bezout(s) -> int:
    c = bounded_bezout(s["b"], int(s["target"]), int(s["K"]))
    total = sum(x * y for x, y in zip(s["b"], c))
    print(f"c = {list(c)}  sum b_j c_j = {total}")
    _emit(s, "bezout", {"b": s["b"], "target": s["target"], "K": s["K"], "c": list(c)})
    return EXIT_OK if total == int(s["target"]) and max(map(abs, c)) <= int(s["K"]) else EXIT_VIOLATION


def cmd_independence(s) -> int:
    phi = TorusHom(int(s["p"]), tuple(s["freqs"]))
    rel = find_relation(phi, int(s["K"]), method=s.get("method") or "auto", config=_run_config(s))
    if rel is None:
        print(f"independent at K = {s['K']}")
    else:
        print(f"relation {list(rel.k)}")
    _emit(s, "independence", {"p": phi.p, "freqs": list(phi.freqs), "K": s["K"],
                              "relation": None if rel is None else list(rel.k)})
    return EXIT_OK


def cmd_reduce_dim(s) -> int:
    p = int(s["p"])
    phi = TorusHom(p, tuple(s["freqs"]))
    k = s["relation"]
    rel = RelationVector(tuple(k), max(abs(x) for x in k) + 1)
    red = reduce_dimension(phi, lambda t: np.zeros(len(np.atleast_2d(t))), rel)
    print(f"phi' = {list(red.phi.freqs)}  Lipschitz factor = {red.lipschitz_factor}")
    for r in red.matrix.rows:
        print(" ".join(f"{x:>4d}" for x in r))
    # composed torus points agree exactly: V^T phi'(x) = phi(x) mod p
    V = np.array(red.matrix.rows[1:], dtype=np.int64)
    back = (red.phi.residues() @ V) % p
    ok = bool(np.array_equal(back, phi.residues()))
    print(f"phi'(x) V = phi(x) for all x: {ok}")
    _emit(s, "reduction", {"p": p, "freqs": list(phi.freqs), "relation": k, "reduced": list(red.phi.freqs),
                           "matrix": [list(r) for r in red.matrix.rows], "lipschitz_factor": red.lipschitz_factor,
                           "pointwise": ok})
    return EXIT_OK if ok else EXIT_VIOLATION


def cmd_fejer(s) -> int:
    d, K, lam = int(s["d"]), int(s["K"]), float(s["lam"])
    row = {"mass": fejer_mass_sum(d, K), "box_mass": fejer_box_mass(d, K, lam),
           "concentration_bound": fejer_concentration_bound(d, K, lam),
           "lipschitz_formula": fejer_lipschitz_formula(d, K), "lipschitz_sum": fejer_lipschitz_sum(d, K),
           "lipschitz_cap": 4 * d * K ** (d + 1)}
    for k, v in row.items():
        print(f"{k:<22} {v:.12g}")
    _emit(s, "fejer", {"d": d, "K": K, "lam": lam, **row})
    ok = row["box_mass"] >= row["concentration_bound"] - 1e-12 and abs(row["mass"] - K**d) <= 1e-9 * K**d
    return EXIT_OK if ok else EXIT_VIOLATION


def cmd_equidist(s) -> int:
    phi = TorusHom(int(s["p"]), tuple(s["freqs"]))
    slope = float(s["slope"])
    F, integral = tent([0.5] * phi.d, slope)
    gap = equidistribution_gap(F, phi, slope, int(s["K"]), integral=integral, config=_run_config(s))
    bound = slope / math.sqrt(int(s["K"]))
    print(f"gap = {gap:.6g}  bound M/sqrt(K) = {bound:.6g}")
    _emit(s, "equidistribution", {"p": phi.p, "freqs": list(phi.freqs), "K": s["K"], "M": slope,
                                  "gap": gap, "bound": bound})
    return EXIT_OK


def cmd_ledger(s) -> int:
    L = parameter_ledger(float(s["alpha1"]), float(s["alpha2"]), float(s["eta"]), float(s["delta"]), float(s["M0"]))
    d = L.to_dict()
    for k, v in d.items():
        if k != "checks":
            print(f"{k:<10} {v}")
    for k, v in L.checks.items():
        print(f"  {k}: {v}")
    _emit(s, "ledger", d)
    ok = all(v if isinstance(v, bool) else v["rel_err"] <= 1e-12 for v in L.checks.values())
    return EXIT_OK if ok else EXIT_VIOLATION


def cmd_oracle(s) -> int:
    names = list(SUITES) if s["suite"] == "all" else [s["suite"]]
    threads = int(os.environ.get(THREADS_ENV, "1") or 1)
    seed = s.get("seed") or 0
    with ThreadPoolExecutor(max_workers=max(1, threads)) as ex:
        results = list(ex.map(lambda n: (n, run_suite(n, seed)), names))
    ok = True
    out = {}
    for name, checks in results:
        for c in checks:
            print(f"[{'PASS' if c.ok else 'FAIL'}] {name}: {c.name}  {c.detail}")
            ok &= c.ok
        out[name] = [{"name": c.name, "ok": c.ok, "detail": c.detail} for c in checks]
    _emit(s, "oracle", out, seed)
    return EXIT_OK if ok else EXIT_VIOLATION


def cmd_generate(s) -> int:
    if not s.get("p"):
        raise UsageError("generate needs -p")
    rec = generate(s["kind"], int(s["p"]), seed=s.get("seed", 0), **_kv(s.get("param")))
    text = rec.dumps()
    if s.get("out"):
        Path(s["out"]).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="vosperstab", description="Popular-doubling stability toolkit for Z/pZ.")
    ap.add_argument("--version", action="version", version=f"vosperstab {__version__}")
    sub = ap.add_subparsers(dest="cmd", required=True)

    sp = sub.add_parser("decompose", help="regularity decomposition of 1_A (or a constant)")
    _set_args(sp)
    _common(sp)
    sp.add_argument("--constant", type=float)
    sp.add_argument("--level", choices=("baby", "intermediate", "final"))
    sp.add_argument("--epsilon", type=float)
    sp.add_argument("--growth", help='e.g. "affine:a=1,b=15" (the default)')
    sp.set_defaults(func=cmd_decompose)

    sp = sub.add_parser("verify", help="run the stability pipeline and tabulate every inequality")
    _set_args(sp)
    _common(sp)
    sp.add_argument("-t", type=float)
    sp.add_argument("--delta", type=float)
    sp.add_argument("--eta", type=float)
    sp.add_argument("--epsilon", type=float)
    sp.add_argument("--lambda", type=float, dest="lambda")
    sp.add_argument("--growth", help="default: M + max(15, ceil(1.25/alpha))")
    sp.add_argument("--alpha-window", type=float, nargs=2)
    sp.set_defaults(func=cmd_verify)

    for name, fn, hlp in (("ap-cover", cmd_ap_cover, "shortest progression containing the set"),
                          ("sumset", cmd_sumset, "S+S with the Cauchy-Davenport check")):
        sp = sub.add_parser(name, help=hlp)
        _set_args(sp)
        _common(sp)
        sp.set_defaults(func=fn)

    sp = sub.add_parser("popdouble", help="E min(1A*1A, t) over thresholds")
    _set_args(sp)
    _common(sp)
    sp.add_argument("-t", type=float)
    sp.add_argument("--thresholds", type=float, nargs="+")
    sp.add_argument("--delta", type=float)
    sp.set_defaults(func=cmd_popdouble)

    sp = sub.add_parser("bohr", help="Bohr set of a torus homomorphism")
    _common(sp)
    sp.add_argument("-p", type=int, required=True)
    sp.add_argument("--freqs", type=_ints, required=True)
    sp.add_argument("--radius", type=float, required=True)
    sp.set_defaults(func=cmd_bohr)

    sp = sub.add_parser("complete-matrix", help="integer completion of a vector")
    _common(sp)
    sp.add_argument("a", type=_ints)
    sp.set_defaults(func=cmd_complete_matrix)

    sp = sub.add_parser("bezout", help="bounded Bezout coefficients")
    _common(sp)
    sp.add_argument("b", type=_ints)
    sp.add_argument("--target", type=int, required=True)
    sp.add_argument("-K", type=int, required=True)
    sp.set_defaults(func=cmd_bezout)

    sp = sub.add_parser("independence", help="search for an integer relation")
    _common(sp)
    sp.add_argument("-p", type=int, required=True)
    sp.add_argument("--freqs", type=_ints, required=True)
    sp.add_argument("-K", type=int, required=True)
    sp.add_argument("--method", choices=("auto", "box", "mitm"))
    sp.set_defaults(func=cmd_independence)

    sp = sub.add_parser("reduce-dim", help="drop one dimension using a relation")
    _common(sp)
    sp.add_argument("-p", type=int, required=True)
    sp.add_argument("--freqs", type=_ints, required=True)
    sp.add_argument("--relation", type=_ints, required=True)
    sp.set_defaults(func=cmd_reduce_dim)

    sp = sub.add_parser("fejer", help="Fejer kernel mass, concentration and Lipschitz numbers")
    _common(sp)
    sp.add_argument("-d", type=int, required=True)
    sp.add_argument("-K", type=int, required=True)
    sp.add_argument("--lam", type=float, default=0.25)
    sp.set_defaults(func=cmd_fejer)

    sp = sub.add_parser("equidist", help="equidistribution gap of a tent function")
    _common(sp)
    sp.add_argument("-p", type=int, required=True)
    sp.add_argument("--freqs", type=_ints, required=True)
    sp.add_argument("-K", type=int, required=True)
    sp.add_argument("--slope", type=float, default=3.0)
    sp.set_defaults(func=cmd_equidist)

    sp = sub.add_parser("ledger", help="worst-case parameter ledger (log2 where tiny)")
    _common(sp)
    sp.add_argument("--alpha1", type=float, required=True)
    sp.add_argument("--alpha2", type=float, required=True)
    sp.add_argument("--eta", type=float, required=True)
    sp.add_argument("--delta", type=float, required=True)
    sp.add_argument("--M0", type=float, required=True)
    sp.set_defaults(func=cmd_ledger)

    sp = sub.add_parser("oracle", help=f"brute-force oracle suite; threads from ${THREADS_ENV}")
    _common(sp)
    sp.add_argument("suite", choices=(*SUITES, "all"))
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("generate", help="seeded set generator")
    _common(sp)
    sp.add_argument("kind", choices=KINDS)
    sp.add_argument("-p", type=int)
    sp.add_argument("--param", action="append", metavar="KEY=VALUE")
    sp.set_defaults(func=cmd_generate)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        s = _settings(args)
        return args.func(s)
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, PreconditionError, TypeError, KeyError) as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (CapExceeded, GrowthOverflow) as e:
        print(f"cap exceeded: {e}", file=sys.stderr)
        return EXIT_CAP
    except BoundViolation as e:
        print(f"property violation: {e}", file=sys.stderr)
        return EXIT_VIOLATION


if __name__ == "__main__":
    sys.exit(main())
