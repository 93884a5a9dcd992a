"""Command-line front end.

    python -m planarbm.cli list densities
    python -m planarbm.cli verify-identity basel --tol 1e-7
    python -m planarbm.cli sample --rule winding-sym --r 1 --n 100000 --seed 42 --format csv

JSON (default) or CSV goes to stdout, diagnostics to stderr.  Exit status is
0 on success, 1 when a verification fails and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import inspect
import io
import json
import math
import sys

import numpy as np

from . import densities as dens
from . import geometry as geo
from . import identities as ids
from . import maps as mp
from . import montecarlo as mc
from .montecarlo import gates

SCHEMA = 1
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

RULES = {
    "exit": ("domain", "domain-param", "track-winding"),
    "winding-sym": ("r",),
    "winding-asym": ("r1", "r2"),
    "prescribed-arg": ("r",),
    "hit-segment": (),
    "hit-double-ray": (),
    "homotopy-segment": (),
}
DEFAULT_START = {"exit": None, "hit-segment": 2j, "hit-double-ray": 0j, "homotopy-segment": 0j}

# standard harmonic test functions per density; log|z| only where 0 is outside
DYNKIN_DEFAULT = ("re_z1", "im_z1", "re_z2")
DYNKIN_EXTRA = {"annulus": ("log_abs",)}


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------- output


def _clean(v):
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, (complex, np.complexfloating)):
        return [_clean(float(v.real)), _clean(float(v.imag))]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    if isinstance(v, np.ndarray):
        return _clean(v.tolist())
    return v


def _emit_json(obj: dict, out) -> None:
    body = {"schema": SCHEMA, **obj}
    out.write(json.dumps(_clean(body), sort_keys=True, indent=2) + "\n")


def _emit_csv(header, rows, out) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in r])
    out.write(buf.getvalue())


# ---------------------------------------------------------------- parsing helpers


def _number(text: str):
    try:
        z = complex(text.replace(" ", ""))
    except ValueError:
        raise UsageError(f"not a number: {text!r}") from None
    return z.real if z.imag == 0 else z


def _params(pairs) -> dict:
    out = {}
    for p in pairs or ():
        if "=" not in p:
            raise UsageError(f"--param expects name=value, got {p!r}")
        k, v = p.split("=", 1)
        out[k.strip()] = _number(v)
    return out


def _density(args, name=None):
    name = name or args.id
    if name not in dens.CATALOG:
        raise UsageError(f"unknown density {name!r}; see 'list densities'")
    params = _params(args.param)
    if args.trunc is not None:
        factory, _ = dens.CATALOG[name]
        sig = inspect.signature(factory).parameters
        key = "K" if "K" in sig else "N" if "N" in sig else None
        if key is None:
            raise UsageError(f"density {name!r} has no truncation parameter")
        params[key] = int(args.trunc)
    return dens.make_density(name, **params)


def _curve(d, cid):
    if cid is None:
        return d.curve_ids[0]
    if cid not in d.curve_ids:
        raise UsageError(f"curve must be one of {list(d.curve_ids)}")
    return cid


def _grid(curve: geo.BoundaryCurve, n: int) -> np.ndarray:
    """``n`` arclength points on the curve; unbounded ends are cut at 10."""
    if n < 2:
        raise UsageError("--grid must be at least 2")
    lo, hi = curve.s_range
    if curve.shape == "arc":
        return np.linspace(lo, hi, n, endpoint=False)
    if math.isinf(lo) and math.isinf(hi):
        lo, hi = -10.0, 10.0
    elif math.isinf(hi):
        hi = lo + 10.0
    elif math.isinf(lo):
        lo = hi - 10.0
    return np.linspace(lo, hi, n)


def _config(args) -> mc.PathConfig:
    return mc.PathConfig(step=args.step, boundary_tol=args.eps, seed=args.seed, scheme=args.scheme)


# ---------------------------------------------------------------- commands


def cmd_list(args, out):
    what = args.what
    if what == "densities":
        items = []
        for name, (_, defaults) in sorted(dens.CATALOG.items()):
            d = dens.make_density(name)
            items.append({"id": name, "tag": d.tag, "defaults": defaults, "curves": list(d.curve_ids),
                          "domain": d.domain.kind, "has_cdf": d.has_cdf, "gate": name in gates.GATES})
    elif what == "maps":
        items = [{"id": name} for name in sorted(mp.CATALOG)]
    elif what == "identities":
        items = []
        for name, (_, defaults) in sorted(ids.CATALOG.items()):
            items.append({"id": name, "kind": ids.make_identity(name).kind, "defaults": defaults})
    elif what == "rules":
        items = [{"id": k, "params": list(v)} for k, v in sorted(RULES.items())]
    else:
        items = [{"id": g.id, "density": g.density, "params": g.params} for _, g in sorted(gates.GATES.items())]
    if args.format == "csv":
        _emit_csv(["id"], [[it["id"]] for it in items], out)
    else:
        _emit_json({"list": what, "items": items}, out)
    return EXIT_OK


def _tabulate(args, out, kind):
    d = _density(args)
    cid = _curve(d, args.curve)
    if args.s:
        s = np.array(args.s, dtype=float)
    elif args.grid:
        s = _grid(d.domain.curve(cid), args.grid)
    else:
        raise UsageError("give --s values or --grid n")
    vals = d.value(cid, s) if kind == "density" else d.cdf(cid, s)
    if args.format == "csv":
        _emit_csv(["s", kind], zip(s, vals), out)
    else:
        _emit_json({"id": args.id, "tag": d.tag, "curve": cid, "params": d.params,
                    "truncation": d.truncation, "s": s, kind: vals}, out)
    return EXIT_OK


def cmd_density(args, out):
    return _tabulate(args, out, "density")


def cmd_cdf(args, out):
    return _tabulate(args, out, "cdf")


def _rule(args):
    kind = args.rule
    if kind == "exit":
        if args.domain is None:
            raise UsageError("--rule exit needs --domain")
        dp = () if args.domain_param is None else (args.domain_param,)
        return mc.exit_rule(geo.make_domain(args.domain, *dp), args.track_winding)
    need = RULES[kind]
    vals = {k: getattr(args, k) for k in need}
    missing = [k for k, v in vals.items() if v is None]
    if missing:
        raise UsageError(f"--rule {kind} needs " + ", ".join("--" + m for m in missing))
    fn = getattr(mc, kind.replace("-", "_"))
    return fn(**vals)


def cmd_sample(args, out):
    rule = _rule(args)
    start = args.start
    if start is None:
        start = DEFAULT_START.get(args.rule)
        if start is None:
            start = 1.0 if args.rule != "exit" else 0.0
    n = gates.N_GATE if args.n is None else args.n
    S = mc.simulate(complex(start), rule, _config(args), n)
    print(f"{len(S)} of {S.n_paths} paths stopped, abandoned {S.abandoned}", file=sys.stderr)
    if args.format == "csv":
        out.write(S.to_csv())
    else:
        out.write(json.dumps(_clean(S.summary()), sort_keys=True, indent=2) + "\n")
    return EXIT_OK


def _select(name, catalog, label):
    if name == "all":
        return sorted(catalog)
    if name not in catalog:
        raise UsageError(f"unknown {label} {name!r}")
    return [name]


def cmd_verify_density(args, out):
    names = _select(args.id, gates.GATES, "density gate")
    params = _params(args.param)
    if params and len(names) > 1:
        raise UsageError("--param needs a single id")
    n = gates.N_GATE if args.n is None else args.n
    reports = []
    for name in names:
        rep = gates.run_gate(name, n=n, params=params, cfg=_config(args))
        print(f"{name}: ks={rep['ks']:.5f} threshold={rep['threshold']:.5f} "
              f"{'PASS' if rep['pass'] else 'FAIL'}", file=sys.stderr)
        reports.append(rep)
    return _report(reports, out, args.format)


def _identity_report(name, params, tol, trunc):
    if trunc is None:
        return ids.evaluate(name, params, tol)
    ident = ids.make_identity(name, **params)
    if ident.kind == "quadrature":
        raise UsageError(f"{name} is a quadrature identity; --trunc does not apply")
    lhs, rhs = ident.lhs(int(trunc)), ident.rhs()
    tb = ident.tail_bound(int(trunc))
    return {"id": ident.id, "params": ident.params, "lhs": lhs, "rhs": rhs, "residual": abs(lhs - rhs),
            "n_used": int(trunc), "tail_bound": tb, "converged": tb is not None and tb <= tol / 2,
            "pass": bool(abs(lhs - rhs) <= tol)}


def cmd_verify_identity(args, out):
    names = _select(args.id, ids.CATALOG, "identity")
    params = _params(args.param)
    if params and len(names) > 1:
        raise UsageError("--param needs a single id")
    reports = [_identity_report(nm, params, args.tol, args.trunc) for nm in names]
    return _report(reports, out, args.format)


def _report(reports, out, fmt):
    ok = all(r["pass"] for r in reports)
    if fmt == "csv":
        _emit_csv(["id", "pass"], [[r["id"], r["pass"]] for r in reports], out)
    elif len(reports) == 1:
        _emit_json(reports[0], out)
    else:
        _emit_json({"pass": ok, "results": reports}, out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_dynkin(args, out):
    d = _density(args)
    labels = args.h or list(DYNKIN_DEFAULT) + list(DYNKIN_EXTRA.get(args.id, ()))
    rows = []
    for lab in labels:
        h = dens.harmonic(lab)
        try:
            err = dens.dynkin_check(d, h)
        except dens.ConvergenceError as e:
            print(f"{lab}: {e}", file=sys.stderr)
            err = math.inf
        rows.append({"h": lab, "error": err, "pass": bool(err <= args.tol)})
    ok = all(r["pass"] for r in rows)
    if args.format == "csv":
        _emit_csv(["h", "error", "pass"], [[r["h"], r["error"], r["pass"]] for r in rows], out)
    else:
        _emit_json({"id": args.id, "tag": d.tag, "params": d.params, "tol": args.tol,
                    "checks": rows, "pass": ok}, out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_export(args, out):
    d = _density(args, args.density)
    n = 200 if args.grid is None else args.grid
    cids = [_curve(d, args.curve)] if args.curve else list(d.curve_ids)
    rows = []
    for cid in cids:
        s = _grid(d.domain.curve(cid), n)
        v = d.value(cid, s)
        c = d.cdf(cid, s) if d.has_cdf else np.full(s.shape, math.nan)
        rows.extend((cid, a, b, e) for a, b, e in zip(s, v, c))
    if args.format == "csv":
        if len(cids) == 1:
            _emit_csv(["s", "value", "cdf"], [r[1:] for r in rows], out)
        else:
            _emit_csv(["curve", "s", "value", "cdf"], rows, out)
    else:
        _emit_json({"id": args.density, "tag": d.tag, "params": d.params, "truncation": d.truncation, "grid": n,
                    "rows": [{"curve": r[0], "s": r[1], "value": r[2], "cdf": r[3]} for r in rows]}, out)
    return EXIT_OK


# ---------------------------------------------------------------- parser


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _u64(text):
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("common options")
    g.add_argument("--seed", type=_u64, default=0, help="RNG seed (default 0)")
    g.add_argument("--n", type=_positive_int, default=None, help="number of paths (default 100000)")
    g.add_argument("--step", type=_positive_float, default=1e-4, help="euler step h (default 1e-4)")
    g.add_argument("--eps", type=_positive_float, default=1e-6, help="walk-on-spheres tolerance (default 1e-6)")
    g.add_argument("--tol", type=_positive_float, default=1e-7, help="verification tolerance (default 1e-7)")
    g.add_argument("--trunc", type=_positive_int, default=None, help="series truncation K/N")
    g.add_argument("--format", choices=("json", "csv"), default="json")
    g.add_argument("--grid", type=_positive_int, default=None, help="number of grid points")
    g.add_argument("--param", action="append", metavar="NAME=VALUE", help="density or identity parameter")
    g.add_argument("--scheme", choices=mc.rules.SCHEMES, default="walk_on_spheres")

    p = argparse.ArgumentParser(prog="planarbm", description="Hitting densities of planar Brownian motion.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("list", parents=[common], help="list catalogs")
    s.add_argument("what", choices=("densities", "maps", "identities", "rules", "gates"))
    s.set_defaults(func=cmd_list)

    for name, fn in (("density", cmd_density), ("cdf", cmd_cdf)):
        s = sub.add_parser(name, parents=[common], help=f"evaluate a {name} on a boundary curve")
        s.add_argument("id")
        s.add_argument("--curve")
        s.add_argument("--s", type=float, action="append", help="arclength point (repeatable)")
        s.set_defaults(func=fn)

    s = sub.add_parser("sample", parents=[common], help="simulate stopped paths")
    s.add_argument("--rule", choices=sorted(RULES), required=True)
    s.add_argument("--start", type=_number, default=None, help="start point, e.g. 0.5 or 0.2+0.3j")
    s.add_argument("--r", type=_positive_float)
    s.add_argument("--r1", type=_positive_float)
    s.add_argument("--r2", type=_positive_float)
    s.add_argument("--domain", choices=sorted(geo.CONSTRUCTORS))
    s.add_argument("--domain-param", type=_positive_float)
    s.add_argument("--track-winding", action="store_true")
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("verify-density", parents=[common], help="Monte Carlo KS gate for a density")
    s.add_argument("id", help="gate id or 'all'")
    s.set_defaults(func=cmd_verify_density)

    s = sub.add_parser("verify-identity", parents=[common], help="check a series identity")
    s.add_argument("id", help="identity id or 'all'")
    s.set_defaults(func=cmd_verify_identity)

    s = sub.add_parser("dynkin", parents=[common], help="harmonic-function checks of a density")
    s.add_argument("id")
    s.add_argument("--h", action="append", choices=sorted(dens.HARMONIC))
    s.set_defaults(func=cmd_dynkin)

    s = sub.add_parser("export", parents=[common], help="tabulate s, value, cdf for plotting")
    s.add_argument("--density", required=True)
    s.add_argument("--curve")
    s.set_defaults(func=cmd_export)
    return p


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits 0 for --help and 2 for bad arguments
        return int(e.code or 0)
    try:
        return args.func(args, out)
    except dens.ConvergenceError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAIL
    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, TypeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
