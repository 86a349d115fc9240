"""``burgers-rigidity`` command line: ``verify``, ``entropy`` and ``report``.

Exit codes: 0 every check passed, 1 a check failed, 2 usage or config error.
Options may come from ``--config FILE`` (flat ``key = value`` lines, keys are
long option names); options given on the command line win.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io as _stdio
import json
import re
import sys
from pathlib import Path

import numpy as np

from . import io
from .entropy import (IVPConfig, InstabilityError, MIN_OFFSET_CELLS, backshift_experiment, initial_state, l1_error,
                      shock_position, snapshots_csv, solve_ivp)
from .fields import Domain
from .solutions import field_from_spec, parse_spec, riemann_entropy_solution, RiemannData
from .singular import detect_singular
from .transform import (GraphCurve, TransformError, StripError, delta_csv, sine_strips, transform_multistrip,
                        transform_simple)
from .verify import (DegenerateSamplesError, OleinikParams, ResidualReport, burgers_residual,
                     check_gradient_identities, check_oleinik, classify, delta_constancy, eikonal_residual)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
DELTA_TOLERANCE = 1e-8
DELTA_POINTS = 200

DEFAULTS = {
    "domain": (-5.0, 5.0, -5.0, 5.0),
    "grid": (401, 401),
    "tol_quad": 1e-10,
    "tol_fd": 1e-6,
    "oleinik_e": 1.05,
    "classify_threshold": None,
    "min_offset_cells": float(MIN_OFFSET_CELLS),
    "out": "out",
    "seed": 0,
    "field": None,
    "graphs": "simple",
    "ivp": None,
    "t": 1.0,
    "cells": 400,
    "backshift": None,
}


class UsageError(Exception):
    pass


def _floats(n):
    def conv(text):
        try:
            vals = tuple(float(v) for v in text.split(","))
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected {n} comma-separated numbers, got {text!r}") from None
        if len(vals) != n:
            raise argparse.ArgumentTypeError(f"expected {n} comma-separated numbers, got {text!r}")
        return vals
    return conv


def _ints(n):
    conv = _floats(n)

    def f(text):
        vals = conv(text)
        if any(v != int(v) for v in vals):
            raise argparse.ArgumentTypeError(f"expected integers, got {text!r}")
        return tuple(int(v) for v in vals)
    return f


def _positive(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return v


def _shift_list(text):
    try:
        vals = tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad shift list {text!r}") from None
    if not vals or any(v <= 0 for v in vals):
        raise argparse.ArgumentTypeError("shifts must be positive")
    return vals


def _common(parser):
    S = argparse.SUPPRESS
    g = parser.add_argument_group("global options")
    g.add_argument("--domain", type=_floats(4), default=S, metavar="XMIN,XMAX,TMIN,TMAX")
    g.add_argument("--grid", type=_ints(2), default=S, metavar="NX,NT")
    g.add_argument("--tol-quad", dest="tol_quad", type=_positive, default=S)
    g.add_argument("--tol-fd", dest="tol_fd", type=_positive, default=S)
    g.add_argument("--oleinik-e", dest="oleinik_e", type=_positive, default=S)
    g.add_argument("--classify-threshold", dest="classify_threshold", type=_positive, default=S)
    g.add_argument("--min-offset-cells", dest="min_offset_cells", type=float, default=S,
                   help="shortest difference-quotient offset, in cells, for Oleinik checks on computed data")
    g.add_argument("--out", default=S, metavar="DIR")
    g.add_argument("--seed", type=int, default=S)
    g.add_argument("--config", default=S, metavar="FILE")


def build_parser():
    parser = argparse.ArgumentParser(prog="burgers-rigidity", description=__doc__.splitlines()[0],
                                     allow_abbrev=False)
    _common(parser)
    sub = parser.add_subparsers(dest="command", required=True)
    S = argparse.SUPPRESS
    v = sub.add_parser("verify", allow_abbrev=False,
                       help="residual, transform, classification and singular-set checks for a field")
    _common(v)
    v.add_argument("--field", default=S, help="catalog spec, e.g. constant:c=3 or cone:x0=0,t0=0")
    v.add_argument("--graphs", choices=("none", "simple", "sine3"), default=S)
    e = sub.add_parser("entropy", allow_abbrev=False,
                       help="Godunov evolution with Oleinik and shock diagnostics")
    _common(e)
    e.add_argument("--ivp", default=S, help="initial data, e.g. riemann:ul=1,ur=0 or sine")
    e.add_argument("--t", type=_positive, default=S)
    e.add_argument("--cells", type=int, default=S)
    e.add_argument("--backshift", type=_shift_list, default=S, metavar="T1,T2,...")
    r = sub.add_parser("report", allow_abbrev=False,
                       help="aggregate the manifests in --out into tables and plot data")
    _common(r)
    return parser


def _read_config(path):
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    tokens = []
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, val = line.partition("=")
        if not eq:
            raise UsageError(f"{path}:{n}: expected key = value")
        # one token per entry so values such as "-5,5,-5,5" are not read as flags
        tokens.append("--" + key.strip().replace("_", "-") + "=" + val.strip())
    return tokens


def resolve(argv):
    """Parse ``argv`` (and any config file) into a dict of settings."""
    parser = build_parser()
    ns = vars(parser.parse_args(argv))
    if "config" in ns:
        path = ns.pop("config")
        tokens = [ns["command"]] + _read_config(path)
        try:
            from_file = vars(parser.parse_args(tokens))
        except SystemExit:
            raise UsageError(f"bad entry in config {path}") from None
        from_file.pop("config", None)
        for k, val in from_file.items():
            ns.setdefault(k, val)
    cfg = dict(DEFAULTS)
    cfg.update(ns)
    xmin, xmax, tmin, tmax = cfg["domain"]
    nx, nt = cfg["grid"]
    try:
        Domain(xmin, xmax, tmin, tmax, nx, nt)
    except ValueError as exc:
        raise UsageError(f"bad domain/grid: {exc}") from None
    return cfg


def _domain(cfg):
    return Domain(*cfg["domain"], *cfg["grid"])


def _manifest_config(cfg):
    keep = {
        "verify": ("field", "graphs", "domain", "grid", "tol_quad", "tol_fd", "classify_threshold", "seed"),
        "entropy": ("ivp", "t", "cells", "backshift", "domain", "oleinik_e", "min_offset_cells"),
        "report": (),
    }[cfg["command"]]
    return {k: cfg[k] for k in keep}


def _slug(text):
    return re.sub(r"[^A-Za-z0-9]+", "_", text).strip("_") or "run"


def _manifest_path(cfg, label):
    digest = hashlib.sha256(io.dumps(_manifest_config(cfg)).encode()).hexdigest()[:10]
    return Path(cfg["out"]) / f"{cfg['command']}_{_slug(label)}_{digest}.json"


def _failure(check, message, **details):
    return ResidualReport(check, float("inf"), float("inf"), 0, 0.0, False, details={"error": message, **details})


# -- verify -----------------------------------------------------------------------

def cmd_verify(cfg) -> int:
    if not cfg["field"]:
        raise UsageError("verify needs --field")
    try:
        h = field_from_spec(cfg["field"])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    domain = _domain(cfg)
    tol_fd = cfg["tol_fd"]
    reports = [burgers_residual(h, domain, use_exact=True, tolerance=None if h.has_exact_partials else tol_fd)]
    classification = None
    extra = {}
    u = None
    xs = np.linspace(domain.x_min, domain.x_max, DELTA_POINTS)
    if cfg["graphs"] != "none":
        try:
            if cfg["graphs"] == "simple":
                u = transform_simple(h, GraphCurve.sine(0.5), 0.0, 1.0, tol=cfg["tol_quad"], check_xs=domain.xs)
            else:
                u = transform_multistrip(h, sine_strips(), tol=cfg["tol_quad"], check_xs=domain.xs)
            u.assemble(domain)  # surfaces evaluation failures before the checks
        except (TransformError, StripError, ValueError, ArithmeticError) as exc:
            reports.append(_failure("transform", str(exc), point=getattr(exc, "point", None)))
            u = None
    if u is not None:
        reports.append(eikonal_residual(u, domain, "fd", tol_fd))
        reports.append(check_gradient_identities(u, domain, tol_fd))
        reports.append(delta_constancy(u, xs, DELTA_TOLERANCE))
        extra["delta_profiles"] = {str(g.label): {"x": xs, "delta": u.delta(g.label, xs)} for g in u.strips.graphs}
        try:
            res = classify(u, domain, cfg["classify_threshold"], seed=cfg["seed"])
            classification = res.to_dict()
            ok = res.kind == "Affine"
            reports.append(ResidualReport("classification", 0.0 if ok else 1.0, 0.0, 1, 0.0, ok,
                                          details={"kind": res.kind, "required": "Affine"}))
        except DegenerateSamplesError as exc:
            reports.append(_failure("classification", str(exc)))
    est = detect_singular(h, domain=domain)
    empty = est.empty
    reports.append(ResidualReport("singular_set", float(est.h1_estimate), float(est.proj_x_measure),
                                  int(len(est.points)), 0.0, empty,
                                  est.points[0].tolist() if not empty else None,
                                  details={"required": "empty"}))
    out = Path(cfg["out"])
    path = _manifest_path(cfg, cfg["field"])
    if not empty:
        io.atomic_write_text(path.with_suffix(".singular.csv"), est.points_csv())
    if u is not None:
        for g in u.strips.graphs:
            io.atomic_write_text(path.with_suffix(f".delta{g.label}.csv"), delta_csv(xs, u.delta(g.label, xs)))
    return _finish(cfg, path, reports, classification, est.to_dict(), extra, out)


# -- entropy ----------------------------------------------------------------------

def _exact_solution(ivp):
    """Exact entropy solution ``(x, t) -> u`` for Riemann and constant data, else None."""
    name, opts = parse_spec(ivp)
    try:
        if name == "riemann" and float(opts.get("x0", 0.0)) == 0.0:
            return riemann_entropy_solution(RiemannData(float(opts["ul"]), float(opts["ur"])))
        if name == "constant":
            c = float(opts["c"])
            return lambda x, t: np.full(np.shape(x), c)
    except (KeyError, ValueError):
        return None
    return None


def cmd_entropy(cfg) -> int:
    if not cfg["ivp"]:
        raise UsageError("entropy needs --ivp")
    T = cfg["t"]
    x_extent = tuple(cfg["domain"][:2])
    samples = tuple(s for s in OleinikParams().t_samples if s < T) + (T,)
    try:
        ivp = IVPConfig(cfg["ivp"], x_extent, int(cfg["cells"]), T, snapshot_times=samples)
        initial_state(ivp)
    except (ValueError, KeyError) as exc:
        raise UsageError(f"bad IVP: {exc}") from None
    path = _manifest_path(cfg, cfg["ivp"])
    reports, extra = [], {"dx": ivp.dx, "n_cells": ivp.n_cells}
    try:
        traj = solve_ivp(ivp)
    except InstabilityError as exc:
        reports.append(_failure("solve_ivp", str(exc)))
        return _finish(cfg, path, reports, None, None, extra, Path(cfg["out"]))
    final = traj.at(T)
    scale = max(1.0, float(np.max(np.abs(traj.snapshots[0].u))) if traj.snapshots[0].t == 0 else 1.0)
    over = traj.max_principle_violation
    reports.append(ResidualReport("max_principle", over, over, traj.steps, 1e-12 * scale, over <= 1e-12 * scale))
    cons = traj.conservation_error
    reports.append(ResidualReport("conservation", cons, cons, traj.steps, 1e-10, cons <= 1e-10))
    params = OleinikParams(E=cfg["oleinik_e"], t_samples=samples, min_offset_cells=cfg["min_offset_cells"])
    reports.append(check_oleinik([traj.at(s) for s in samples], params))
    exact = _exact_solution(cfg["ivp"])
    if exact is not None:
        extra["l1_error"] = l1_error(final, exact)
    name, opts = parse_spec(cfg["ivp"])
    if name == "riemann" and float(opts["ul"]) > float(opts["ur"]):
        ul, ur = float(opts["ul"]), float(opts["ur"])
        x0 = float(opts.get("x0", 0.0))
        expected = x0 + 0.5 * (ul + ur) * T
        try:
            found = shock_position(final, 0.5 * (ul + ur))
            err = abs(found - expected)
            reports.append(ResidualReport("shock_position", err, err, 1, 2.0 * ivp.dx, err <= 2.0 * ivp.dx,
                                          (found, T), details={"expected": expected, "found": found}))
        except ValueError as exc:
            reports.append(_failure("shock_position", str(exc), expected=expected))
    if cfg["backshift"]:
        try:
            bs = backshift_experiment(cfg["ivp"], cfg["backshift"], x_extent, int(cfg["cells"]), cfg["oleinik_e"],
                                      min_offset_cells=cfg["min_offset_cells"])
        except InstabilityError as exc:
            reports.append(_failure("backshift", str(exc)))
        else:
            worst = max(q * T_ - cfg["oleinik_e"] for q, T_ in zip(bs.max_quotient, bs.shifts))
            reports.append(ResidualReport("backshift", max(worst, 0.0), 0.0, len(bs.shifts), 0.0, bs.all_passed,
                                          details=bs.to_dict()))
    io.atomic_write_text(path.with_suffix(".snapshot.csv"), snapshots_csv(final))
    return _finish(cfg, path, reports, None, None, extra, Path(cfg["out"]))


def _finish(cfg, path, reports, classification, singular, extra, out):
    passed = all(r.passed for r in reports)
    manifest = {
        "command": cfg["command"],
        "config": _manifest_config(cfg),
        "reports": [r.to_dict() for r in reports],
        "classification": classification,
        "singular_estimate": singular,
        "passed": passed,
        **extra,
    }
    out.mkdir(parents=True, exist_ok=True)
    io.write_json(path, manifest)
    for r in reports:
        if not r.passed:
            print(f"FAIL {r.check}: max_abs={r.max_abs!r} tolerance={r.tolerance!r}"
                  + (f" ({r.details['error']})" if "error" in r.details else ""), file=sys.stderr)
    print(f"{'PASS' if passed else 'FAIL'} {path}")
    return EXIT_OK if passed else EXIT_FAIL


# -- report -----------------------------------------------------------------------

PLOT_SCRIPT = '''"""Plot the series in this directory. Generated file; needs matplotlib."""
import csv
import glob
import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
for path in sorted(glob.glob(os.path.join(here, "*.csv"))):
    with open(path) as fh:
        rows = [r for r in csv.reader(line for line in fh if not line.startswith("#"))]
    header, data = rows[0], [[float(v) for v in r] for r in rows[1:]]
    if not data:
        continue
    fig, ax = plt.subplots()
    ax.plot([r[0] for r in data], [r[1] for r in data], marker="o")
    ax.set_xlabel(header[0])
    ax.set_ylabel(header[1])
    ax.set_title(os.path.basename(path))
    if header[0] == "eps":
        ax.set_xscale("log")
    fig.savefig(path[:-4] + ".png", dpi=120)
    plt.close(fig)
'''


def _load_manifests(out):
    found = []
    for p in sorted(Path(out).glob("*.json")):
        try:
            data = json.loads(p.read_text())
        except (OSError, json.JSONDecodeError):
            continue
        if isinstance(data, dict) and {"command", "config", "reports", "passed"} <= data.keys():
            found.append((p, data))
    return found


def _fit_slope(x, y):
    slope, _ = np.polyfit(x, y, 1)
    return float(slope)


def cmd_report(cfg) -> int:
    out = Path(cfg["out"])
    manifests = _load_manifests(out) if out.is_dir() else []
    if not manifests:
        raise UsageError(f"no manifests in {out}")
    plots = out / "plots"
    rows = []
    groups = {}
    for p, m in manifests:
        conf = m["config"]
        subject = conf.get("field") or conf.get("ivp") or ""
        failing = [r["check"] for r in m["reports"] if not r["passed"]]
        kind = (m.get("classification") or {}).get("kind", "")
        h1 = (m.get("singular_estimate") or {}).get("h1_estimate", "")
        rows.append((p.name, m["command"], subject, "pass" if m["passed"] else "fail", kind, h1, ";".join(failing)))
        stem = _slug(p.stem)
        est = m.get("singular_estimate")
        if est and est.get("n_points"):
            pre = est["premeasure"]
            io.write_columns(plots / f"premeasure_{stem}.csv", ["eps", "premeasure"],
                             [[e for e, _ in pre], [v for _, v in pre]], comment=f"{subject}: box-count H1 surrogate")
        for label, prof in (m.get("delta_profiles") or {}).items():
            io.write_columns(plots / f"delta_{stem}_graph{label}.csv", ["x", "delta"], [prof["x"], prof["delta"]],
                             comment=f"{subject}: gluing offset on graph {label}")
        # residual-vs-resolution series: entropy L1 error, verify eikonal residual
        if m["command"] == "entropy" and isinstance(m.get("l1_error"), float):
            key = ("entropy", subject, conf.get("t"))
            groups.setdefault(key, []).append((m["dx"], m["l1_error"]))
        elif m["command"] == "verify":
            eik = next((r for r in m["reports"] if r["check"] == "eikonal_residual"), None)
            if eik and isinstance(eik["max_abs"], float) and eik["max_abs"] > 0:
                d = conf["domain"]
                dx = (d[1] - d[0]) / (conf["grid"][0] - 1)
                groups.setdefault(("verify", subject, conf.get("graphs")), []).append((dx, eik["max_abs"]))
    for key, pts in sorted(groups.items(), key=lambda kv: str(kv[0])):
        pts = sorted(set(pts))
        if len({dx for dx, _ in pts}) < 2 or any(e <= 0 for _, e in pts):
            continue
        ldx, lerr = np.log([dx for dx, _ in pts]), np.log([e for _, e in pts])
        slope = _fit_slope(ldx, lerr)
        io.write_columns(plots / f"convergence_{_slug('_'.join(str(k) for k in key))}.csv", ["log_dx", "log_error"],
                         [ldx, lerr], comment=f"{key[0]} {key[1]}: least-squares slope = {slope!r}")
    header = ("manifest", "command", "subject", "status", "classification", "h1_estimate", "failing_checks")
    buf = _stdio.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    io.atomic_write_text(out / "summary.csv", buf.getvalue())
    widths = [max(len(str(r[i])) for r in rows + [header]) for i in range(len(header))]
    txt = [" | ".join(str(c).ljust(w) for c, w in zip(r, widths)).rstrip() for r in [header] + rows]
    io.atomic_write_text(out / "summary.txt", "\n".join(txt) + "\n")
    io.atomic_write_text(plots / "plot_all.py", PLOT_SCRIPT)
    print(f"{len(rows)} manifests summarised in {out / 'summary.txt'}")
    return EXIT_OK


COMMANDS = {"verify": cmd_verify, "entropy": cmd_entropy, "report": cmd_report}


def main(argv=None) -> int:
    try:
        cfg = resolve(sys.argv[1:] if argv is None else list(argv))
        return COMMANDS[cfg["command"]](cfg)
    except SystemExit as exc:  # argparse usage errors
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
