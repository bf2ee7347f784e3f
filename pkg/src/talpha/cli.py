"""Command-line front end: ``talpha kernel | solve | verify | asymptotics | mobius``.

Every command writes CSV files and a JSON summary into ``--out`` (default
``talpha-out``) and prints the summary on stdout.  Settings come from flags
and an optional JSON file given with ``--config``; flags win on conflict.

Exit codes: 0 success, 1 a tolerance failed, 2 invalid configuration,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, checks, estimates, fields, kernels, moebius, solver
from .errors import AccuracyWarning, DomainError, TalphaError
from .moebius import Params
from .quadrature import cached_sphere_rule

EXIT_OK, EXIT_TOLERANCE, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

DEFAULTS = {
    "n": 3,
    "alpha": 0.5,
    "out": "talpha-out",
    "timing": False,
    # kernel
    "ray": "0:0.99:100",
    "direction": None,
    # solve
    "case": None,
    "phi_csv": None,
    "hyperbolic": False,
    "orders": "4,8,16",
    "radii": "0,0.2,0.4,0.6,0.8",
    "tolerance": 1e-3,
    # verify
    "all": False,
    "criteria": None,
    # asymptotics
    "experiment": "i_alpha",
    "beta": 0.5,
    "s": None,
    "order": 16,
    "r_min": estimates.WINDOW[0],
    "r_max": estimates.WINDOW[1],
    "points": estimates.WINDOW_POINTS,
    # mobius
    "self_test": False,
    "count": 1000,
    "seed": 0,
}

EXPERIMENTS = ("i_alpha", "j_alpha_beta", "d_integral", "disc", "gradient")


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    n: int
    alpha: float
    options: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return asdict(self)


# --- output -------------------------------------------------------------------


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def _header(cfg: RunConfig) -> str:
    return (f"# talpha {__version__}\n"
            f"# config: {json.dumps(cfg.as_dict(), sort_keys=True)}\n")


def write_csv(path: Path, cfg: RunConfig, columns, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n", encoding="utf-8") as f:
        f.write(_header(cfg) + buf.getvalue())


def _jsonable(o):
    if isinstance(o, dict):
        return {str(k): _jsonable(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_jsonable(v) for v in o]
    if isinstance(o, (np.floating, float)):
        v = float(o)
        return v if math.isfinite(v) else repr(v)
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return _jsonable(o.tolist())
    return o


def write_json(path: Path, cfg: RunConfig, payload: dict) -> str:
    doc = {"version": __version__, "config": cfg.as_dict(), **_jsonable(payload)}
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n", encoding="utf-8") as f:
        f.write(text)
    return text


# --- configuration -------------------------------------------------------------


def _parse_floats(text, what):
    try:
        return [float(v) for v in str(text).split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"{what} must be a comma-separated list of numbers, got {text!r}") from None


def parse_ray(text: str):
    """'start:stop:count' -> count equally spaced radii, endpoints included."""
    try:
        a, b, k = str(text).split(":")
        a, b, k = float(a), float(b), int(k)
    except ValueError:
        raise ConfigError(f"--ray expects start:stop:count, got {text!r}") from None
    if k < 1 or not (0 <= a < 1 and 0 <= b < 1):
        raise ConfigError("--ray needs 0 <= start, stop < 1 and count >= 1")
    return np.linspace(a, b, k)


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, then the JSON config file, then explicit flags."""
    merged = dict(DEFAULTS)
    if args.config:
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"cannot read config {args.config}: {e}") from None
        if not isinstance(loaded, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = set(k.replace("-", "_") for k in loaded) - set(DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        merged.update({k.replace("-", "_"): v for k, v in loaded.items()})
    for k in DEFAULTS:
        v = getattr(args, k, None)
        if v is not None and v is not False:
            merged[k] = v
    try:
        n = int(merged.pop("n"))
        alpha = float(merged.pop("alpha"))
    except (TypeError, ValueError):
        raise ConfigError("n must be an integer and alpha a real number") from None
    if not alpha > -1:
        raise ConfigError(f"alpha must satisfy alpha > -1, got {alpha:g}")
    disc = args.command == "asymptotics" and merged.get("experiment") == "disc"
    if n < (2 if disc else 3):
        raise ConfigError(f"n must be >= 3 (n = 2 only for the disc experiment), got {n}")
    # keep only options the command uses, so headers stay stable
    used = COMMAND_OPTIONS[args.command]
    opts = {k: merged[k] for k in sorted(used)}
    return RunConfig(args.command, n, alpha, opts)


COMMAND_OPTIONS = {
    "kernel": {"out", "ray", "direction"},
    "solve": {"out", "case", "phi_csv", "hyperbolic", "orders", "radii", "tolerance", "timing"},
    "verify": {"out", "all", "criteria", "timing"},
    "asymptotics": {"out", "experiment", "beta", "s", "order", "r_min", "r_max", "points"},
    "mobius": {"out", "self_test", "count", "seed"},
}


# --- commands ------------------------------------------------------------------


def _signed_inf(c: float) -> float:
    return math.copysign(math.inf, c)


def cmd_kernel(cfg: RunConfig) -> int:
    p = Params(cfg.n, cfg.alpha)
    o = cfg.options
    radii = parse_ray(o["ray"])
    if o["direction"] is None:
        zeta = np.eye(p.n)[0]
    else:
        zeta = np.array(_parse_floats(o["direction"], "--direction"))
        if zeta.shape != (p.n,) or not np.linalg.norm(zeta) > 0:
            raise ConfigError(f"--direction needs {p.n} components, not all zero")
        zeta = zeta / np.linalg.norm(zeta)
    rows = []
    for r in radii:
        x = r * zeta
        pk = float(kernels.poisson_kernel(p, x, zeta))
        if r == 0:
            g = _signed_inf(kernels.green_origin_constant(p))
            rg = _signed_inf(kernels.green_derivative_origin_constant(p))
            h = _signed_inf(kernels.constants(p).d_alpha_paper)
        else:
            g = float(kernels.green_profile(p, r))
            rg = float(kernels.green_derivative_profile(p, r))
            h = float(kernels.h_alpha_density(p, r))
        rows.append((r, pk, g, rg, h, float(kernels.k_alpha(p, r))))
    out = Path(o["out"])
    write_csv(out / "kernel.csv", cfg, ["r", "P_alpha_center_ray", "G_alpha", "RG_alpha", "h_alpha", "k_alpha"],
              rows)
    kc = solver.audit_sign(p)
    payload = {"constants": kc.as_dict(), "direction": zeta.tolist(), "rows": len(rows),
               "green_origin_constant": kernels.green_origin_constant(p),
               "k_alpha_limit": kernels.k_alpha_limit(p)}
    print(write_json(out / "kernel.json", cfg, payload), end="")
    return EXIT_OK


def _load_phi_csv(path: str, n: int, order: int):
    """Boundary data sampled at the nodes of the order-``order`` sphere rule."""
    rule = cached_sphere_rule(n, order)
    try:
        rows = [r for r in csv.reader(open(path, newline="")) if r and not r[0].startswith("#")]
    except OSError as e:
        raise ConfigError(f"cannot read {path}: {e}") from None
    try:
        body = np.array([[float(v) for v in r] for r in rows[1:]], dtype=float)
    except ValueError:
        raise ConfigError(f"{path}: expected a header row then numeric rows x1..x{n},phi") from None
    if body.ndim != 2 or body.shape[0] != len(rule) or body.shape[1] != n + 1:
        got = body.shape[0] if body.ndim == 2 else 0
        raise ConfigError(f"{path}: {got} boundary nodes given, but the sphere rule of order {order} "
                          f"in n={n} has {len(rule)} nodes (columns x1..x{n},phi expected)")
    if np.max(np.abs(body[:, :n] - rule.nodes)) > 1e-12:
        raise ConfigError(f"{path}: node coordinates do not match the sphere rule of order {order}")
    values = body[:, n]

    def phi(z):
        z = np.asarray(z, dtype=float)
        if z.shape == rule.nodes.shape and np.array_equal(z, rule.nodes):
            return values
        raise DomainError("CSV boundary data can only be evaluated at the rule nodes")

    return rule, phi


def cmd_solve(cfg: RunConfig) -> int:
    p = Params(cfg.n, cfg.alpha)
    o = cfg.options
    orders = [int(v) for v in _parse_floats(o["orders"], "--orders")]
    if not orders or min(orders) < 2:
        raise ConfigError("--orders needs positive integers >= 2")
    radii = _parse_floats(o["radii"], "--radii")
    if any(not 0 <= r < 1 for r in radii):
        raise ConfigError("--radii must lie in [0, 1)")
    if o["hyperbolic"] and p.alpha != p.n - 2:
        raise ConfigError(f"--hyperbolic needs alpha = n - 2 = {p.n - 2}, got {p.alpha:g}")
    if (o["case"] is None) == (o["phi_csv"] is None):
        raise ConfigError("give exactly one of --case or --phi-csv")
    grid = solver.evaluation_grid(p.n, radii)
    out = Path(o["out"])
    cols = [f"x{i + 1}" for i in range(p.n)] + ["u"]
    if o["phi_csv"]:
        order = orders[-1]
        rule, phi = _load_phi_csv(o["phi_csv"], p.n, order)
        prob = solver.DirichletProblem(p, phi, lambda z: np.zeros(np.shape(z)[:-1]))
        from .quadrature import ball_rule

        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", AccuracyWarning)
            u = solver.dirichlet_solve(prob, grid, rule, ball_rule(p.n, order, order),
                                       hyperbolic=o["hyperbolic"], method="direct")
        write_csv(out / "solution.csv", cfg, cols, [(*x, v) for x, v in zip(grid, u)])
        payload = {"points": len(grid), "nodes": len(rule),
                   "warnings": sorted({str(w.message) for w in caught})}
        print(write_json(out / "solve.json", cfg, payload), end="")
        return EXIT_OK
    try:
        u = fields.manufactured(o["case"], p)
    except ValueError as e:
        raise ConfigError(str(e)) from None
    rep = solver.verify_representation(p, u, grid, orders=orders, hyperbolic=o["hyperbolic"])
    write_csv(out / "solution.csv", cfg, cols, [(*x, v) for x, v in zip(grid, rep.extra["values"])])
    _write_text(out / "convergence.csv", _header(cfg) + rep.convergence_csv(timing=o["timing"]))
    d = rep.to_dict()
    d.pop("values", None)
    ok = rep.sup_error < o["tolerance"] and rep.monotone
    d["passed"] = ok
    d["tolerance"] = o["tolerance"]
    print(write_json(out / "report.json", cfg, d), end="")
    if not ok:
        print(f"tolerance failure: sup_error {rep.sup_error:.3g} (tol {o['tolerance']:g}), "
              f"monotone={rep.monotone}", file=sys.stderr)
        return EXIT_TOLERANCE
    return EXIT_OK


def _write_text(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n", encoding="utf-8") as f:
        f.write(text)


def cmd_verify(cfg: RunConfig) -> int:
    o = cfg.options
    if o["all"]:
        which = sorted(checks.ALL_CHECKS)
    elif o["criteria"]:
        which = sorted({int(v) for v in _parse_floats(o["criteria"], "--criteria")})
        bad = [k for k in which if k not in checks.ALL_CHECKS]
        if bad:
            raise ConfigError(f"unknown criteria {bad}; choose from {sorted(checks.ALL_CHECKS)}")
    else:
        raise ConfigError("give --all or --criteria")
    results = []
    for k in which:
        r = checks.run_checks([k], Params(cfg.n, cfg.alpha))[0]
        print(r.line(), file=sys.stderr)
        results.append(r)
    out = Path(o["out"])
    rows = [row for r in results for row in r.csv_rows()]
    write_csv(out / "verify.csv", cfg, ["criterion", "metric", "value", "tolerance", "kind", "status"], rows)
    summary = {
        "passed": all(r.passed for r in results),
        "criteria": {str(r.criterion): {"title": r.title, "passed": r.passed,
                                        "failures": [m.name for m in r.failures()],
                                        "notes": r.notes, "details": r.details,
                                        **({"runtime_seconds": r.runtime, "budget_seconds": r.budget}
                                           if o["timing"] else {})}
                     for r in results},
    }
    print(write_json(out / "verify.json", cfg, summary), end="")
    failed = [r for r in results if not r.passed]
    for r in failed:
        for m in r.failures():
            print(f"tolerance failure: criterion {r.criterion}: {m.name} = {m.value:.6g} "
                  f"(tolerance {m.tolerance:g}, {m.kind})", file=sys.stderr)
    return EXIT_TOLERANCE if failed else EXIT_OK


def _asymptotic_fit(cfg: RunConfig):
    o = cfg.options
    exp = o["experiment"]
    if exp not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {exp!r}; choose from {list(EXPERIMENTS)}")
    if not (0 <= o["r_min"] < o["r_max"] < 1) or int(o["points"]) < 4:
        raise ConfigError("need 0 <= r_min < r_max < 1 and at least 4 points")
    radii = estimates.window_radii(o["r_min"], o["r_max"], int(o["points"]))
    a, n, order = cfg.alpha, cfg.n, int(o["order"])
    if exp == "i_alpha":
        fit, tol = estimates.i_alpha_sweep(a, n, radii, order), 0.1
    elif exp == "j_alpha_beta":
        if not (a > 0 and 0 < o["beta"] <= 1):
            raise ConfigError("j_alpha_beta needs alpha > 0 and 0 < beta <= 1")
        fit, tol = estimates.j_alpha_beta_sweep(a, o["beta"], n, radii, order), 0.15
    elif exp == "d_integral":
        s = n + 1 if o["s"] is None else o["s"]
        fit, tol = estimates.d_integral_sweep(s, n, radii, order), 0.1
    elif exp == "disc":
        if cfg.n != 2:
            raise ConfigError("the disc experiment runs in n = 2")
        fit = estimates.disc_sweep(a, None if o["r_min"] == DEFAULTS["r_min"] and o["r_max"] == DEFAULTS["r_max"]
                                   else radii, order)
        tol = 0.1
    else:
        p = Params(n, a)
        x0 = np.eye(n)[-1]
        fit = estimates.gradient_probe(p, estimates.holder_data(x0, o["beta"]), x0, radii, order)
        fit.extra["reference"] = min(0.0, o["beta"] - 1)
        tol = 0.1 if o["beta"] >= 1 else 0.15
    return fit, tol


def cmd_asymptotics(cfg: RunConfig) -> int:
    fit, tol = _asymptotic_fit(cfg)
    ref = fit.extra.get("reference")
    if fit.kind == "log":
        passed = fit.r_squared > 0.99
        criterion = "log-fit r_squared > 0.99"
    elif cfg.options["experiment"] == "disc" or fit.extra.get("regime") == "bounded":
        passed = fit.fitted_exponent > -tol
        criterion = f"bounded: fitted_exponent > -{tol:g}"
    elif cfg.options["experiment"] == "gradient" and ref == 0.0:
        passed = fit.fitted_exponent > -tol
        criterion = f"fitted_exponent > -{tol:g}"
    else:
        passed = abs(fit.fitted_exponent - ref) <= tol
        criterion = f"|fitted_exponent - reference| <= {tol:g}"
    out = Path(cfg.options["out"])
    exp = cfg.options["experiment"]
    rows = sorted(((1 - d, v) for d, v in fit.samples), key=lambda t: t[0])
    write_csv(out / f"{exp}.csv", cfg, ["r", "value"], rows)
    payload = {**fit.as_dict(), "experiment": exp, "passed": passed, "criterion": criterion}
    if exp == "gradient":
        payload["local_exponents"] = estimates.local_exponents(fit)
    print(write_json(out / f"{exp}.json", cfg, payload), end="")
    if not passed:
        print(f"tolerance failure: {exp}: {criterion} (fitted {fit.fitted_exponent:.4g}, "
              f"r_squared {fit.r_squared:.4g})", file=sys.stderr)
        return EXIT_TOLERANCE
    return EXIT_OK


def cmd_mobius(cfg: RunConfig) -> int:
    o = cfg.options
    if not o["self_test"]:
        raise ConfigError("mobius: only --self-test is available")
    if int(o["count"]) < 1:
        raise ConfigError("--count must be positive")
    res = moebius.self_test(int(o["count"]), (3, 4, 5), int(o["seed"]))
    out = Path(o["out"])
    write_csv(out / "mobius.csv", cfg, ["identity", "max_residual"], sorted(res.items()))
    passed = all(v < 1e-12 for v in res.values())
    print(write_json(out / "mobius.json", cfg, {"max_residuals": res, "tolerance": 1e-12, "passed": passed}),
          end="")
    if not passed:
        bad = [k for k, v in res.items() if v >= 1e-12]
        print(f"tolerance failure: {bad}", file=sys.stderr)
        return EXIT_TOLERANCE
    return EXIT_OK


COMMANDS = {"kernel": cmd_kernel, "solve": cmd_solve, "verify": cmd_verify,
            "asymptotics": cmd_asymptotics, "mobius": cmd_mobius}


# --- argument parsing ---------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, help="dimension (default 3)")
    common.add_argument("--alpha", type=float, help="weight alpha > -1 (default 0.5)")
    common.add_argument("--config", help="JSON file with settings; flags override it")
    common.add_argument("--out", help="output directory (default talpha-out)")

    ap = argparse.ArgumentParser(prog="talpha", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"talpha {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    k = sub.add_parser("kernel", parents=[common], help="tabulate P, G, RG, h, k along a ray")
    k.add_argument("--ray", help="start:stop:count (default 0:0.99:100)")
    k.add_argument("--direction", help="comma-separated ray direction (default e1)")

    s = sub.add_parser("solve", parents=[common], help="solve a Dirichlet problem")
    s.add_argument("--case", help="manufactured solution: " + ", ".join(sorted(fields.MANUFACTURED)) + ", kernel-slice")
    s.add_argument("--phi-csv", dest="phi_csv", help="boundary data at the sphere-rule nodes (x1..xn,phi)")
    s.add_argument("--hyperbolic", action="store_true", default=None, help="use P_h and G_h (alpha = n-2)")
    s.add_argument("--orders", help="comma-separated quadrature orders (default 4,8,16)")
    s.add_argument("--radii", help="evaluation radii (default 0,0.2,0.4,0.6,0.8)")
    s.add_argument("--tolerance", type=float, help="sup-error tolerance (default 1e-3)")
    s.add_argument("--timing", action="store_true", default=None, help="record runtimes")

    v = sub.add_parser("verify", parents=[common], help="run the acceptance experiments")
    v.add_argument("--all", action="store_true", default=None, help="run every criterion")
    v.add_argument("--criteria", help="comma-separated criterion numbers")
    v.add_argument("--timing", action="store_true", default=None, help="record runtimes")

    a = sub.add_parser("asymptotics", parents=[common], help="boundary growth experiments")
    a.add_argument("--experiment", help="one of " + ", ".join(EXPERIMENTS))
    a.add_argument("--beta", type=float, help="beta for j_alpha_beta and gradient (default 0.5)")
    a.add_argument("--s", type=float, help="exponent s for d_integral (default n+1)")
    a.add_argument("--order", type=int, help="quadrature order (default 16)")
    a.add_argument("--r-min", dest="r_min", type=float, help="window start (default 0.9)")
    a.add_argument("--r-max", dest="r_max", type=float, help="window end (default 0.999)")
    a.add_argument("--points", type=int, help="radii in the window (default 10)")

    m = sub.add_parser("mobius", parents=[common], help="Moebius identity self-test")
    m.add_argument("--self-test", dest="self_test", action="store_true", default=None)
    m.add_argument("--count", type=int, help="random pairs per dimension (default 1000)")
    m.add_argument("--seed", type=int, help="RNG seed (default 0)")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = resolve_config(args)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", AccuracyWarning)
            return COMMANDS[cfg.command](cfg)
    except (ConfigError, DomainError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (TalphaError, ArithmeticError, FloatingPointError) as e:
        print(f"numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
