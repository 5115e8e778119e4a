"""Command-line front end.

Degrees, kilometres, dB and dBm on the command line; radians, metres and
linear ratios inside. Every table goes out as CSV.

Exit codes: 0 success, 1 usage error, 2 domain error, 3 verification failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import analytic, channel, geometry, simulator
from .distributions import effective_satellite_count
from .geometry import DomainError
from .tables import write_csv

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_VERIFY = 0, 1, 2, 3

SWEEP_COLUMNS = [
    "sweep_variable",
    "value",
    "metric_analytic_actualN",
    "metric_analytic_effectiveN",
    "metric_mc",
    "mc_halfwidth",
    "n_eff_used",
    "error",
]

# CLI unit -> internal unit for each sweep variable
_TO_INTERNAL = {
    "threshold_db": lambda v: v,
    "tx_power": lambda v: v,
    "n_act": lambda v: v,
    "altitude": lambda v: v * 1e3,
    "min_elevation": math.radians,
    "inclination": math.radians,
    "user_latitude": math.radians,
}


class UsageError(Exception):
    pass


def _n_mode(text: str):
    text = str(text).strip()
    if text in analytic.N_MODES:
        return text
    if text.startswith("explicit:"):
        try:
            return float(text.split(":", 1)[1])
        except ValueError:
            pass
    raise UsageError(f"--n-mode must be actual, effective or explicit:<real>, got {text!r}")


def _generator(text: str):
    text = str(text).strip()
    if text == "random_inclined":
        return simulator.RandomInclined()
    if text == "uniform_shell":
        return simulator.UniformShell()
    if text.startswith("walker:"):
        try:
            p, s, f = (int(x) for x in text.split(":", 1)[1].split("/"))
        except ValueError:
            raise UsageError(f"walker generator must look like walker:P/S/F, got {text!r}") from None
        return simulator.WalkerDelta(p, s, f)
    raise UsageError(f"--generator must be random_inclined, uniform_shell or walker:P/S/F, got {text!r}")


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    low = str(text).strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"expected a boolean, got {text!r}")


@dataclass(frozen=True)
class RunConfig:
    """Fully resolved run configuration in CLI units."""

    n_act: int = 648
    altitude_km: float = 500.0
    inclination_deg: float = 70.0
    min_elevation_deg: float = 10.0
    user_lat_deg: float = 0.0
    tx_power_w: float = 10.0
    noise_dbm: float = -93.0
    alpha: float = 2.0
    rician_k: float = 100.0
    unit_mean_gain: bool = True
    n_mode: str = "effective"
    threshold_db: float = 10.0
    generator: str = "random_inclined"
    trials: int = 100_000
    seed: int = 0
    workers: int = 1

    def cfg(self) -> geometry.ConstellationConfig:
        return geometry.ConstellationConfig(
            self.n_act,
            self.altitude_km * 1e3,
            math.radians(self.inclination_deg),
            math.radians(self.min_elevation_deg),
        )

    def link(self) -> channel.LinkBudget:
        return channel.LinkBudget.from_dbm(
            self.tx_power_w,
            self.noise_dbm,
            path_loss_exponent=self.alpha,
            rician_k=self.rician_k,
            unit_mean_gain=self.unit_mean_gain,
        )

    def scenario(self, n_mode=None) -> analytic.Scenario:
        return analytic.Scenario(
            self.cfg(),
            self.link(),
            geometry.UserLocation(math.radians(self.user_lat_deg)),
            n_mode=_n_mode(self.n_mode) if n_mode is None else n_mode,
        )

    def mc(self) -> simulator.MonteCarloSpec:
        return simulator.MonteCarloSpec(self.trials, self.seed, self.workers)

    def kind(self):
        return _generator(self.generator)

    def validate(self):
        # building every object runs all domain checks up front
        self.scenario()
        self.mc()
        kind = self.kind()
        if isinstance(kind, simulator.WalkerDelta) and kind.total != self.n_act:
            raise DomainError(f"walker pattern has {kind.total} satellites, --n-act is {self.n_act}")


_FIELD_TYPES = {
    f.name: {"int": int, "float": float, "bool": _bool, "str": str}[f.type]
    for f in dataclasses.fields(RunConfig)
}


def read_config_file(path) -> dict:
    """Parse ``key=value`` lines; keys may use dashes or underscores."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (p.strip() for p in line.split("=", 1))
        key = key.lstrip("-").replace("-", "_")
        if key not in _FIELD_TYPES:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        out[key] = value
    return out


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, then the config file, then explicit flags."""
    merged = {}
    if getattr(args, "config", None):
        merged.update(read_config_file(args.config))
    for name in _FIELD_TYPES:
        v = getattr(args, name, None)
        if v is not None:
            merged[name] = v
    try:
        typed = {k: _FIELD_TYPES[k](v) for k, v in merged.items()}
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return RunConfig(**typed)


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"could not parse number list {text!r}") from None


# ---------------------------------------------------------------------------
# commands


def cmd_geometry(rc: RunConfig) -> list[dict]:
    cfg = rc.cfg()
    rows = [
        {"quantity": "max_slant_range_km", "value": geometry.max_slant_range(cfg) / 1e3},
        {"quantity": "visibility_probability", "value": geometry.visibility_probability(cfg)},
        {"quantity": "latitude_limit_deg", "value": math.degrees(geometry.coverage_latitude_limit(cfg))},
    ]
    try:
        alt = geometry.min_altitude_for_global_coverage(cfg.inclination_rad, cfg.min_elevation_rad)
    except DomainError as exc:
        raise DomainError(f"minimum altitude for global coverage is undefined: {exc}") from None
    rows.append({"quantity": "min_global_coverage_altitude_km", "value": alt / 1e3})
    return rows


def _metric_value(s: analytic.Scenario, metric: str, threshold_db: float) -> float:
    if metric == "rate":
        return analytic.average_rate(s).value
    return analytic.coverage_probability(s, threshold_db).value


def _mc_metric(ts: simulator.TrialSet, metric: str, threshold_db: float, lb) -> analytic.MetricResult:
    return ts.rate(lb) if metric == "rate" else ts.coverage(threshold_db, lb)


def sweep_rows(rc: RunConfig, metric: str, variable: str, values: list[float], simulate: bool) -> list[dict]:
    """One CSV row per sweep value; domain failures go to the ``error`` column."""
    if len(values) < 2:
        raise UsageError("the sweep range is empty; give at least two points")
    spec = analytic.SweepSpec(variable, tuple(_TO_INTERNAL[variable](v) for v in values), metric, rc.threshold_db)
    base = rc.scenario()
    eff_mode = base.n_mode if not isinstance(base.n_mode, str) else "effective"
    kind = rc.kind() if simulate else None
    shared = None
    if simulate and variable in ("threshold_db", "tx_power"):
        shared = simulator.simulate(kind, base.cfg, base.lb, base.user, rc.mc(), base.earth)
    rows = []
    for cli_value, value in zip(values, spec.values):
        row = {"sweep_variable": variable, "value": cli_value}
        errors = []
        t = value if variable == "threshold_db" else rc.threshold_db
        try:
            point = analytic.with_parameter(base, variable, value)
        except DomainError as exc:
            row["error"] = str(exc)
            rows.append(row)
            continue
        for col, mode in (("metric_analytic_actualN", "actual"), ("metric_analytic_effectiveN", eff_mode)):
            try:
                s = dataclasses.replace(point, n_mode=mode)
                row[col] = _metric_value(s, metric, t)
                if col == "metric_analytic_effectiveN":
                    row["n_eff_used"] = s.resolve_n()
            except DomainError as exc:
                errors.append(str(exc))
        if simulate:
            ts = shared
            if ts is None:
                ts = simulator.simulate(kind, point.cfg, point.lb, point.user, rc.mc(), point.earth)
            res = _mc_metric(ts, metric, t, point.lb)
            row["metric_mc"] = res.value
            row["mc_halfwidth"] = res.error
        if errors:
            row["error"] = "; ".join(errors)
        rows.append(row)
    return rows


# name -> (metric, variable, values in CLI units, [(file stem, overrides per row group)])
def _recipes() -> dict:
    thresholds = [float(v) for v in np.arange(-10.0, 30.5, 1.0)]
    powers = [float(v) for v in np.round(np.logspace(-1, 2, 16), 10)]
    counts = [float(v) for v in range(100, 2001, 100)]
    altitudes = [float(v) for v in range(400, 2001, 50)]
    per_alt = [
        (f"rmin{alt}", [{"altitude_km": float(alt), "n_act": n} for n in (120, 648)])
        for alt in (500, 1000, 1500)
    ]
    per_alt_rate = [(f"rmin{alt}", [{"altitude_km": float(alt), "n_act": 648}]) for alt in (500, 1000, 1500)]
    per_shape = [
        (f"inc{inc}_elev{el}", [{"inclination_deg": float(inc), "min_elevation_deg": float(el), "altitude_km": 500.0}])
        for inc in (53, 70)
        for el in (10, 20)
    ]
    per_elev = [(f"elev{el}", [{"min_elevation_deg": float(el), "n_act": 648}]) for el in (10, 20, 30)]
    return {
        "fig2": ("coverage", "threshold_db", thresholds, per_alt),
        "fig3": ("rate", "tx_power", powers, per_alt_rate),
        "fig4": ("coverage", "n_act", counts, per_shape),
        "fig5": ("coverage", "altitude", altitudes, per_elev),
        "fig6": ("rate", "n_act", counts, per_shape),
        "fig7": ("rate", "altitude", altitudes, per_elev),
    }


RECIPES = tuple(_recipes())


def run_recipe(rc: RunConfig, name: str, out_dir: Path, simulate: bool) -> list[Path]:
    metric, variable, values, groups = _recipes()[name]
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for stem, variants in groups:
        rows = []
        for overrides in variants:
            rows.extend(sweep_rows(dataclasses.replace(rc, **overrides), metric, variable, values, simulate))
        path = out_dir / f"{name}_{stem}.csv"
        write_csv(rows, SWEEP_COLUMNS, path)
        written.append(path)
    return written


def cmd_neff(rc: RunConfig, latitudes_deg: list[float]) -> list[dict]:
    rows = []
    for lat in latitudes_deg:
        row = {"user_latitude_deg": lat, "n_act": rc.n_act}
        try:
            ne = effective_satellite_count(rc.n_act, math.radians(rc.inclination_deg), math.radians(lat))
            row.update(n_eff=ne.value, n_eff_rounded=ne.rounded, ratio=ne.value / rc.n_act)
        except DomainError as exc:
            row["error"] = str(exc)
        rows.append(row)
    return rows


NEFF_COLUMNS = ["user_latitude_deg", "n_act", "n_eff", "n_eff_rounded", "ratio", "error"]
SIMULATE_COLUMNS = [
    "threshold_db",
    "coverage_mc",
    "coverage_halfwidth",
    "coverage_analytic",
    "upper_bound",
    "visible_fraction",
    "rate_mc",
    "rate_halfwidth",
    "rate_analytic",
    "n_used",
]


def cmd_simulate(rc: RunConfig, thresholds: list[float]) -> list[dict]:
    s = rc.scenario()
    ts = simulator.simulate(rc.kind(), s.cfg, s.lb, s.user, rc.mc(), s.earth)
    rate_mc = ts.rate()
    rate_an = analytic.average_rate(s).value
    bound = analytic.coverage_upper_bound(s)
    rows = []
    for t in thresholds:
        cov = ts.coverage(t)
        rows.append({
            "threshold_db": t,
            "coverage_mc": cov.value,
            "coverage_halfwidth": cov.error,
            "coverage_analytic": analytic.coverage_probability(s, t).value,
            "upper_bound": bound,
            "visible_fraction": ts.visible_fraction().value,
            "rate_mc": rate_mc.value,
            "rate_halfwidth": rate_mc.error,
            "rate_analytic": rate_an,
            "n_used": s.resolve_n(),
        })
    return rows


VERIFY_THRESHOLDS_DB = (-10.0, 0.0, 10.0, 20.0, 30.0)
UNIFORM_COVERAGE_TOL = 0.005
UNIFORM_RATE_REL_TOL = 0.01
NEFF_COVERAGE_TOL = 0.02
NEFF_RATE_REL_TOL = 0.03


def cmd_verify(rc: RunConfig) -> tuple[list[str], bool]:
    """Uniform-shell oracle check and effective-count match check.

    The uniform shell is simulated with ``round(N_eff)`` satellites and
    compared with the analytic result at that same integer count, which
    isolates the quadrature from the effective-count modelling step.
    """
    lines = []
    ok = True
    n = rc.trials
    worst_hw = simulator.Z95 * 0.5 / math.sqrt(n)
    s_eff = rc.scenario(n_mode="effective")
    n_eff = s_eff.resolve_n()
    n_uni = max(1, int(round(n_eff)))
    s_uni = dataclasses.replace(s_eff, cfg=dataclasses.replace(s_eff.cfg, n_act=n_uni), n_mode=float(n_uni))
    lines.append(f"scenario: n_act={rc.n_act} n_eff={n_eff:.6g} trials={n} seed={rc.seed} workers={rc.workers}")

    checks = (
        ("uniform_shell", s_uni, simulator.UniformShell(), UNIFORM_COVERAGE_TOL, UNIFORM_RATE_REL_TOL),
        ("n_eff_match", s_eff, rc.kind(), NEFF_COVERAGE_TOL, NEFF_RATE_REL_TOL),
    )
    for label, s, kind, cov_tol, rate_tol in checks:
        if worst_hw > cov_tol:
            lines.append(
                f"FAIL {label}: insufficient precision, worst-case 95% half-width {worst_hw:.3g} "
                f"exceeds tolerance {cov_tol:g} at {n} trials"
            )
            ok = False
            continue
        ts = simulator.simulate(kind, s.cfg, s.lb, s.user, rc.mc(), s.earth)
        max_dev = 0.0
        for t in VERIFY_THRESHOLDS_DB:
            a = analytic.coverage_probability(s, t).value
            m = ts.coverage(t).value
            dev = abs(a - m)
            max_dev = max(max_dev, dev)
            status = "PASS" if dev <= cov_tol else "FAIL"
            ok &= dev <= cov_tol
            lines.append(f"{status} {label} coverage T={t:g} dB: analytic={a:.6f} mc={m:.6f} |diff|={dev:.6f} tol={cov_tol:g}")
        lines.append(f"     {label} max |analytic - MC| coverage = {max_dev:.6f}")
        a = analytic.average_rate(s).value
        r = ts.rate()
        rel = abs(a - r.value) / a
        if r.error / r.value > rate_tol:
            lines.append(f"FAIL {label} rate: insufficient precision, relative half-width {r.error / r.value:.3g}")
            ok = False
        else:
            status = "PASS" if rel <= rate_tol else "FAIL"
            ok &= rel <= rate_tol
            lines.append(f"{status} {label} rate: analytic={a:.6f} mc={r.value:.6f} rel={rel:.6f} tol={rate_tol:g}")
        if label == "uniform_shell":
            bound = analytic.coverage_upper_bound(s)
            vis = ts.visible_fraction().value
            se = math.sqrt(max(bound * (1.0 - bound), 0.0) / n)
            passed = abs(bound - vis) <= max(3.0 * se, 1.0 / n)
            ok &= passed
            lines.append(
                f"{'PASS' if passed else 'FAIL'} {label} visible fraction: bound={bound:.6f} mc={vis:.6f} "
                f"3se={3.0 * se:.6f}"
            )
    lines.append("RESULT: " + ("PASS" if ok else "FAIL"))
    return lines, ok


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_common(p: argparse.ArgumentParser):
    g = p.add_argument_group("scenario")
    g.add_argument("--config", help="key=value file; flags override it")
    g.add_argument("--n-act", dest="n_act", type=int)
    g.add_argument("--altitude-km", dest="altitude_km", type=float)
    g.add_argument("--inclination-deg", dest="inclination_deg", type=float)
    g.add_argument("--min-elevation-deg", dest="min_elevation_deg", type=float)
    g.add_argument("--user-lat-deg", dest="user_lat_deg", type=float)
    g.add_argument("--tx-power-w", dest="tx_power_w", type=float)
    g.add_argument("--noise-dbm", dest="noise_dbm", type=float)
    g.add_argument("--alpha", type=float, help="path-loss exponent")
    g.add_argument("--rician-k", dest="rician_k", type=float)
    g.add_argument("--unit-mean-gain", dest="unit_mean_gain", action=argparse.BooleanOptionalAction,
                   default=None,
                   help="scale the chi-squared gain to unit mean (default on; --no-unit-mean-gain uses mean 2K+2)")
    g.add_argument("--n-mode", dest="n_mode", help="actual | effective | explicit:<real>")
    g.add_argument("--threshold-db", dest="threshold_db", type=float)
    g.add_argument("--generator", help="random_inclined | uniform_shell | walker:P/S/F")
    g.add_argument("--trials", type=int)
    g.add_argument("--seed", type=int)
    g.add_argument("--workers", type=int)
    g.add_argument("--out", help="output file (or directory for --recipe); default stdout")
    g.add_argument("--show-config", action="store_true", help="echo the resolved configuration to stderr")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="leocov", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    _add_common(sub.add_parser("geometry", help="slant range, visibility and latitude limits"))
    for name, what in (("coverage", "coverage probability"), ("rate", "average rate")):
        p = sub.add_parser(name, help=f"{what} sweep as CSV")
        _add_common(p)
        p.add_argument("--sweep", choices=analytic.SWEEP_VARIABLES,
                       help="variable in CLI units: dB, W, count, km, deg, deg, deg")
        p.add_argument("--values", help="comma-separated sweep values")
        p.add_argument("--start", type=float)
        p.add_argument("--stop", type=float)
        p.add_argument("--num", type=int, default=9)
        p.add_argument("--recipe", choices=RECIPES, help="write a preset group of sweep CSVs into --out")
        p.add_argument("--simulate", action="store_true", help="add a Monte Carlo column")
    p = sub.add_parser("neff", help="effective satellite count over user latitudes")
    _add_common(p)
    p.add_argument("--lat-deg", default="0", help="comma-separated user latitudes")
    p = sub.add_parser("simulate", help="Monte Carlo coverage and rate")
    _add_common(p)
    p.add_argument("--thresholds", help="comma-separated thresholds in dB")
    _add_common(sub.add_parser("verify", help="analytic vs Monte Carlo acceptance checks"))
    return parser


def _sweep_values(args) -> list[float]:
    if args.values is not None:
        return _floats(args.values)
    if args.start is None or args.stop is None:
        raise UsageError("give --values or both --start and --stop")
    if args.num < 2:
        raise UsageError("the sweep range is empty; --num must be >= 2")
    return [float(v) for v in np.linspace(args.start, args.stop, args.num)]


def _emit(rows, columns, out):
    if out:
        write_csv(rows, columns, out)
    else:
        write_csv(rows, columns, sys.stdout)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        rc = resolve_config(args)
        if args.show_config:
            for f in dataclasses.fields(rc):
                print(f"{f.name}={getattr(rc, f.name)}", file=sys.stderr)
        rc.validate()
        if args.command == "geometry":
            _emit(cmd_geometry(rc), ["quantity", "value"], args.out)
        elif args.command in ("coverage", "rate"):
            if args.recipe:
                for path in run_recipe(rc, args.recipe, Path(args.out or "."), args.simulate):
                    print(path)
            else:
                if not args.sweep:
                    raise UsageError("give --sweep (with --values or --start/--stop) or --recipe")
                rows = sweep_rows(rc, args.command, args.sweep, _sweep_values(args), args.simulate)
                _emit(rows, SWEEP_COLUMNS, args.out)
        elif args.command == "neff":
            _emit(cmd_neff(rc, _floats(args.lat_deg)), NEFF_COLUMNS, args.out)
        elif args.command == "simulate":
            thresholds = _floats(args.thresholds) if args.thresholds else [rc.threshold_db]
            _emit(cmd_simulate(rc, thresholds), SIMULATE_COLUMNS, args.out)
        elif args.command == "verify":
            lines, ok = cmd_verify(rc)
            text = "\n".join(lines) + "\n"
            if args.out:
                Path(args.out).write_text(text)
            sys.stdout.write(text)
            return EXIT_OK if ok else EXIT_VERIFY
    except UsageError as exc:
        print(f"leocov: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"leocov: error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
