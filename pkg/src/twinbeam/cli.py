"""Command-line front end.

Times are in units of ``1/Gamma`` (i.e. ``Gamma t``) unless ``--gamma`` is
given, in which case input times are physical and output times are divided
by ``Gamma``.  Angles are radians; ``pi`` fractions such as ``pi/5`` or
``2pi/5`` are accepted.

Exit codes: 0 success, 2 domain error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import concurrent.futures
import csv
import json
import math
import re
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__
from .channel import derive_bath, evolve
from .errors import DomainError, NumericalError, TwinBeamError
from .fock import PPT_FLOOR, OracleConfig, integrate, moments_to_covariance, ppt_min_eigenvalue, twb_density
from .separability import char_poly_profile, ppt_test, survival_time
from .states import twb_state

EXIT_DOMAIN = 2
EXIT_NUMERICAL = 3

CUTOFF_WARN = 35
ORACLE_TOL = 1e-4

UNITS_NOTE = "Times are in units of 1/Gamma unless --gamma is given."


# -- formatting ---------------------------------------------------------------

def fmt(x) -> str:
    """12 significant digits, ``inf``/``nan`` spelled out."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".12g")


def jsonable(x):
    if isinstance(x, dict):
        return {k: jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [jsonable(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if not math.isfinite(x):
            return fmt(x)
        return float(format(x, ".12g"))
    return x


def write_csv(header, rows, stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])


def write_json(params: dict, results, stream) -> None:
    json.dump({"params": jsonable(params), "results": jsonable(results)}, stream, indent=2, sort_keys=False)
    stream.write("\n")


def emit(args, params: dict, header, rows) -> None:
    with _open_out(args.out) as stream:
        if args.format == "json":
            write_json(params, [dict(zip(header, r)) for r in rows], stream)
        else:
            write_csv(header, rows, stream)


class _open_out:
    def __init__(self, path):
        self.path = path

    def __enter__(self):
        if self.path in (None, "-"):
            return sys.stdout
        self._fh = open(self.path, "w", newline="", encoding="utf-8")
        return self._fh

    def __exit__(self, *exc):
        if self.path not in (None, "-"):
            self._fh.close()


# -- argument types -----------------------------------------------------------

_ANGLE = re.compile(r"^\s*([+-]?\d*\.?\d*(?:e[+-]?\d+)?)\s*\*?\s*pi\s*(?:/\s*(\d*\.?\d+))?\s*$", re.I)


def parse_angle(text: str) -> float:
    """Radians from ``"0.6283"``, ``"pi/5"``, ``"2pi/5"``, ``"0.5*pi"``."""
    try:
        return float(text)
    except ValueError:
        pass
    m = _ANGLE.match(text)
    if not m:
        raise argparse.ArgumentTypeError(f"invalid angle {text!r}")
    coef = m.group(1)
    coef = 1.0 if coef in ("", "+") else -1.0 if coef == "-" else float(coef)
    denom = float(m.group(2)) if m.group(2) else 1.0
    return coef * math.pi / denom


def parse_float_list(text: str) -> list[float]:
    """``"0.1,0.5"`` or a range ``"start:stop:step"`` (stop included within rounding)."""
    text = text.strip()
    if not text:
        return []
    if ":" in text:
        start, stop, step = (float(v) for v in text.split(":"))
        if step <= 0:
            raise argparse.ArgumentTypeError("range step must be > 0")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 12) for i in range(max(n, 0))]
    return [float(v) for v in text.split(",")]


# -- sweeps -------------------------------------------------------------------

AXES = ("lambda", "nth", "ns", "theta", "gamma")


@dataclass(frozen=True)
class SweepConfig:
    """Fixed point in parameter space plus one swept axis."""

    lam: float
    n_th: float
    n_s: float
    theta: float
    Gamma: float
    axis: str
    start: float
    stop: float
    step: float | None = None
    count: int | None = None

    def __post_init__(self):
        if self.axis not in AXES:
            raise DomainError(f"unknown sweep axis {self.axis!r}; choose from {', '.join(AXES)}")
        if (self.step is None) == (self.count is None):
            raise DomainError("give exactly one of step or count")
        if self.step is not None and not self.step > 0:
            raise DomainError("sweep step must be > 0")
        if self.count is not None and self.count < 0:
            raise DomainError("sweep count must be >= 0")
        if self.stop < self.start:
            raise DomainError("sweep stop must be >= start")

    def values(self) -> list[float]:
        if self.count is not None:
            if self.count == 0:
                return []
            return np.linspace(self.start, self.stop, self.count).tolist()
        n = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return [self.start + i * self.step for i in range(n)]

    def points(self) -> list[dict]:
        base = {"lambda": self.lam, "nth": self.n_th, "ns": self.n_s, "theta": self.theta, "gamma": self.Gamma}
        return [{**base, self.axis: v} for v in self.values()]


def _survival_row(p: dict) -> list:
    res = survival_time(p["lambda"], p["nth"], p["ns"], p["theta"]).scaled(p["gamma"])
    return [p["lambda"], p["nth"], p["ns"], p["theta"], res.t_s, res.t_0, res.G, res.method.value]


def run_points(func, points: list, jobs: int = 1) -> list:
    """Evaluate ``func`` on every point, keeping input order."""
    if jobs <= 1 or len(points) < 2:
        return [func(p) for p in points]
    with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(func, points))


# -- subcommands --------------------------------------------------------------

SURVIVAL_HEADER = ["lambda", "n_th", "n_s", "theta", "t_s", "t_0", "G", "method"]


def _gamma(args) -> float:
    return 1.0 if args.gamma is None else args.gamma


def cmd_survival(args) -> int:
    point = {"lambda": args.lam, "nth": args.nth, "ns": args.ns, "theta": args.theta, "gamma": _gamma(args)}
    row = _survival_row(point)
    emit(args, _params(args), SURVIVAL_HEADER, [row])
    return 0


def cmd_sweep(args) -> int:
    cfg = SweepConfig(args.lam, args.nth, args.ns, args.theta, _gamma(args), args.axis,
                      args.start, args.stop, args.step, args.count)
    rows = run_points(_survival_row, cfg.points(), args.jobs)
    emit(args, {**_params(args), "axis": args.axis}, SURVIVAL_HEADER, rows)
    return 0


FIG1_HEADER = ["lambda", "n_th", "n_s", "t_s", "t_0", "G"]


def _fig1_row(p: dict) -> list:
    res = survival_time(p["lambda"], p["nth"], p["ns"], 0.0)
    return [p["lambda"], p["nth"], p["ns"], res.t_s, res.t_0, res.G]


def cmd_fig1(args) -> int:
    points = []
    for lam in args.lambdas:
        cfg = SweepConfig(lam, args.nth, 0.0, 0.0, 1.0, "ns", args.ns_start, args.ns_stop, count=args.ns_count)
        points.extend(cfg.points())
    rows = run_points(_fig1_row, points, args.jobs)
    params = {"n_th": args.nth, "lambdas": args.lambdas, "ns_start": args.ns_start,
              "ns_stop": args.ns_stop, "ns_count": args.ns_count}
    emit(args, params, FIG1_HEADER, rows)
    return 0


def cmd_charpoly(args) -> int:
    bath = derive_bath(n_th=args.nth, n_s=args.ns, theta=args.theta)
    report = char_poly_profile(args.lam, bath, args.exp_gt)
    xs = np.linspace(args.x_min, args.x_max, args.x_count) if args.x_count > 0 else np.array([])
    rows = [[x, report.q(x)] for x in xs]
    roots = report.roots
    root_info = {
        "roots": roots.real.tolist(),
        "max_imag": float(np.max(np.abs(roots.imag))),
        "eigenvalues": report.eigenvalues.tolist(),
        "char_poly": report.char_poly.tolist(),
        "n_negative": report.n_negative,
        "separable": report.separable,
    }
    params = {**_params(args), "exp_gt": args.exp_gt}
    if args.format == "json":
        with _open_out(args.out) as stream:
            write_json(params, {"samples": [{"x": x, "q": q} for x, q in rows], **root_info}, stream)
        return 0
    with _open_out(args.out) as stream:
        write_csv(["x", "q"], rows, stream)
    sidecar = args.roots_out
    if sidecar is None and args.out not in (None, "-"):
        sidecar = str(Path(args.out).with_suffix(".roots.json"))
    if sidecar:
        with open(sidecar, "w", encoding="utf-8") as fh:
            write_json(params, root_info, fh)
    return 0


def _time_in_gamma_units(args) -> float:
    if args.t is None:
        raise DomainError("--t is required")
    return args.t * (args.gamma if args.gamma is not None else 1.0)


def cmd_evolve(args) -> int:
    gt = _time_in_gamma_units(args)
    bath = derive_bath(n_th=args.nth, n_s=args.ns, theta=args.theta)
    state = evolve(twb_state(args.lam), bath, gt)
    report = ppt_test(state)
    params = {**_params(args), "gamma_t": gt}
    if args.format == "json":
        with _open_out(args.out) as stream:
            write_json(params, {"mean": state.mean.tolist(), "cov": state.cov.tolist(),
                                "min_eigenvalue": report.min_eigenvalue, "separable": report.separable}, stream)
        return 0
    labels = ["x1", "y1", "x2", "y2"]
    rows = [[labels[i], *state.cov[i]] for i in range(4)]
    with _open_out(args.out) as stream:
        write_csv(["row", *labels], rows, stream)
    return 0


def oracle_compare(lam: float, n_th: float, n_s: float, theta: float, gamma_t: float, d: int,
                   dt: float = 0.01, tol: float = ORACLE_TOL) -> dict:
    """Run the Fock oracle and the Gaussian channel side by side."""
    bath = derive_bath(n_th=n_th, n_s=n_s, theta=theta)
    gauss = evolve(twb_state(lam), bath, gamma_t)
    fock_state = integrate(twb_density(lam, d), bath, OracleConfig(d=d, dt=dt, t_final=gamma_t))
    fock_cov = moments_to_covariance(fock_state)
    gauss_ppt = ppt_test(gauss)
    fock_min = ppt_min_eigenvalue(fock_state)
    discrepancy = float(np.max(np.abs(fock_cov.cov - gauss.cov)))
    agree = gauss_ppt.separable == (fock_min >= -PPT_FLOOR)
    return {
        "max_cov_discrepancy": discrepancy,
        "max_mean_discrepancy": float(np.max(np.abs(fock_cov.mean - gauss.mean))),
        "gaussian_min_eigenvalue": gauss_ppt.min_eigenvalue,
        "gaussian_separable": gauss_ppt.separable,
        "fock_ppt_min_eigenvalue": fock_min,
        "fock_separable": fock_min >= -PPT_FLOOR,
        "verdicts_agree": agree,
        "tolerance": tol,
        "pass": discrepancy <= tol and agree,
        "leakage": fock_state.info["leakage"],
        "edge_population": fock_state.info["edge_population"],
        "steps": fock_state.info["steps"],
    }


def cmd_oracle_compare(args) -> int:
    if args.cutoff > CUTOFF_WARN:
        print(f"warning: cutoff {args.cutoff} > {CUTOFF_WARN}; density matrix has {args.cutoff**4} entries",
              file=sys.stderr)
    gt = _time_in_gamma_units(args)
    report = oracle_compare(args.lam, args.nth, args.ns, args.theta, gt, args.cutoff, args.dt)
    with _open_out(args.out) as stream:
        write_json({**_params(args), "gamma_t": gt, "cutoff": args.cutoff}, report, stream)
    return 0


# -- parser -------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(EXIT_DOMAIN, f"error: {message}\n")


def _params(args) -> dict:
    out = {"lambda": args.lam, "n_th": args.nth, "n_s": args.ns, "theta": args.theta}
    if args.gamma is not None:
        out["gamma"] = args.gamma
    return out


def _add_common(p, need_time=False):
    p.add_argument("--lambda", dest="lam", type=float, required=True, help="twin-beam squeezing lambda (>= 0)")
    p.add_argument("--nth", type=float, default=0.0, help="thermal photons of the bath (default 0)")
    p.add_argument("--ns", type=float, default=0.0, help="squeezing photons of the bath (default 0)")
    p.add_argument("--theta", type=parse_angle, default=0.0,
                   help="bath squeezing phase in radians; accepts pi/5 style fractions (default 0)")
    p.add_argument("--gamma", type=float, default=None,
                   help="damping rate Gamma; when given, times are physical instead of Gamma t")
    if need_time:
        p.add_argument("--t", type=float, default=None,
                       help="evolution time, in units of 1/Gamma unless --gamma is given")


def _add_output(p):
    p.add_argument("--format", choices=("csv", "json"), default="csv", help="output format (default csv)")
    p.add_argument("--out", default=None, help="output file (default standard output)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="twinbeam", description=__doc__.splitlines()[0] + " " + UNITS_NOTE)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("survival", help="entanglement survival time t_s, t_0 and G",
                       description="Survival time of a twin beam. Closed form for theta = 0, bisection otherwise. "
                       + UNITS_NOTE)
    _add_common(p)
    _add_output(p)
    p.set_defaults(func=cmd_survival)

    p = sub.add_parser("sweep", help="survival times along one parameter axis",
                       description="Survival time sweep over one axis. " + UNITS_NOTE)
    _add_common(p)
    p.add_argument("--axis", choices=AXES, required=True)
    p.add_argument("--start", type=float, required=True)
    p.add_argument("--stop", type=float, required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--step", type=float)
    g.add_argument("--count", type=int)
    p.add_argument("--jobs", type=int, default=1, help="worker processes (output order is fixed)")
    _add_output(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fig1", help="G = (t_s - t_0)/t_0 versus n_s for several lambda (real M)",
                       description="Relative survival-time change for an in-phase squeezed bath. "
                       "Times are in units of 1/Gamma.")
    p.add_argument("--nth", type=float, required=True, help="thermal photons of the bath")
    p.add_argument("--lambdas", type=parse_float_list, default=parse_float_list("0.1:1.0:0.15"),
                   help="comma list or start:stop:step (default 0.1:1.0:0.15)")
    p.add_argument("--ns-start", type=float, default=0.02)
    p.add_argument("--ns-stop", type=float, default=1.0)
    p.add_argument("--ns-count", type=int, default=50, help="number of n_s samples (0 gives header only)")
    p.add_argument("--jobs", type=int, default=1)
    _add_output(p)
    p.set_defaults(func=cmd_fig1)

    p = sub.add_parser("charpoly", help="characteristic polynomial q_S(x) = det(S - x I) samples and roots",
                       description="Samples of q_S(x) at the time where exp(-Gamma t) = --exp-gt; "
                       "the four roots go to a JSON sidecar.")
    _add_common(p)
    p.add_argument("--exp-gt", type=float, required=True, help="exp(-Gamma t) in (0, 1]")
    p.add_argument("--x-min", type=float, default=-0.2)
    p.add_argument("--x-max", type=float, default=1.6)
    p.add_argument("--x-count", type=int, default=181)
    p.add_argument("--roots-out", default=None, help="roots sidecar (default <out>.roots.json)")
    _add_output(p)
    p.set_defaults(func=cmd_charpoly)

    p = sub.add_parser("evolve", help="covariance matrix of the twin beam after time t",
                       description="Dump the evolved covariance matrix. " + UNITS_NOTE)
    _add_common(p, need_time=True)
    _add_output(p)
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("oracle-compare", help="Fock-space master equation versus Gaussian evolution",
                       description="Integrate the master equation on a truncated Fock space and compare "
                       "moments and PPT verdicts with the Gaussian channel. " + UNITS_NOTE)
    _add_common(p, need_time=True)
    p.add_argument("--cutoff", type=int, default=25, help="Fock levels per mode (default 25)")
    p.add_argument("--dt", type=float, default=0.01, help="RK4 step in units of 1/Gamma (default 0.01)")
    p.add_argument("--out", default=None, help="output file (default standard output)")
    p.set_defaults(func=cmd_oracle_compare, format="json")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DomainError as exc:
        print(f"error: {_one_line(exc)}", file=sys.stderr)
        return EXIT_DOMAIN
    except (NumericalError, ArithmeticError) as exc:
        print(f"error: {_one_line(exc)}", file=sys.stderr)
        return EXIT_NUMERICAL
    except TwinBeamError as exc:
        print(f"error: {_one_line(exc)}", file=sys.stderr)
        return EXIT_DOMAIN


def _one_line(exc) -> str:
    return " ".join(str(exc).split())


if __name__ == "__main__":
    sys.exit(main())
