"""Command-line front end.

Exit codes: 0 success, 1 a result outside its reference tolerance (or an
oracle violation), 2 bad configuration or arguments.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from cowlab import __version__, attack, bounds, oracle
from cowlab.params import (
    ConfigError,
    ExperimentalParams,
    OutOfRangeError,
    channel_point,
    distance_for_gain,
    expected_coincidence_rate,
    load_config,
)
from cowlab.usd import four_state_usd, three_state_usd, tunable_usd

ORACLE_TOL = 1e-10


class UsageError(ValueError):
    pass


@dataclass
class RunManifest:
    command: str
    config_digest: str
    version: str = __version__
    rows: list = field(default_factory=list)
    wall_time_s: float = 0.0

    def write(self, path: Path):
        path.write_text(json.dumps(self.__dict__, indent=2, sort_keys=True) + "\n")


def _data_path(name: str) -> Path:
    return Path(str(resources.files("cowlab") / "data" / name))


def load_references() -> dict:
    return json.loads(_data_path("references.json").read_text())


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".12g")


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def _read_config(path):
    path = Path(path) if path else _data_path("table2.json")
    params = load_config(path)
    return params, hashlib.sha256(path.read_bytes()).hexdigest()


def _emit(text: str, out, manifest: RunManifest, t0: float):
    manifest.wall_time_s = round(time.perf_counter() - t0, 3)
    if out:
        out = Path(out)
        out.write_text(text)
        manifest.write(out.with_name(out.name + ".manifest.json"))
    else:
        sys.stdout.write(text)


def _log10(x):
    return math.log10(x) if x > 0 else -math.inf


# ---------------------------------------------------------------- reproduce

TABLE_HEADER = ("label", "log10_g_zero", "attenuation_db", "l_zero_km", "reference_value", "abs_error")


def _table_rows(table, p: ExperimentalParams):
    if table == "table3":
        g = attack.baseline_gain_zero(p)
        length = distance_for_gain(p, g)
        yield "attack", bounds.CrossingResult(g, channel_point(p, length).attenuation_db, length, None)
        yield "coincidence", bounds.crossing_coincidence(p)
    elif table == "table4":
        yield "decoy", bounds.crossing_decoy(p)
    elif table == "table5":
        if not p.four_state:
            raise ConfigError("table5 needs f_d and f_v in the config")
        yield "four-state", bounds.four_state_reach(p)


def cmd_reproduce(args) -> int:
    t0 = time.perf_counter()
    params, digest = _read_config(args.config)
    refs = load_references()[args.table]
    manifest = RunManifest(f"reproduce {args.table}", digest)
    rows, ok = [], True
    for p in params:
        for kind, res in _table_rows(args.table, p):
            label = f"{kind} mu={_fmt(p.mu)}"
            ref = refs.get(kind, {}).get(_fmt(p.mu))
            tol = refs.get(kind, {}).get("tolerance", {})
            lg = res.log10_g_zero
            ref_val = err = None
            if ref is not None:
                ref_val = ref["log10_g_zero"]
                err = abs(lg - ref_val)
                d_err = abs(res.l_zero_km - ref["l_zero_km"])
                passed = err <= tol["log10_g_zero"] + 1e-12 and d_err <= tol["l_zero_km"]
                ok &= passed
                if not passed:
                    print(f"{label}: outside tolerance (log10 error {err:.3g}, distance error {d_err:.3g} km)",
                          file=sys.stderr)
            rows.append((label, lg, res.attenuation_db, res.l_zero_km, ref_val, err))
            manifest.rows.append({"label": label, "log10_g_zero": lg, "l_zero_km": res.l_zero_km,
                                  "attenuation_db": res.attenuation_db})
    _emit(_csv_text(TABLE_HEADER, rows), args.out, manifest, t0)
    return 0 if ok else 1


# -------------------------------------------------------------------- sweep


def parse_grid(spec: str) -> np.ndarray:
    try:
        lo, hi, n = spec.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError as exc:
        raise UsageError(f"grid must be lo:hi:n, got {spec!r}") from exc
    if n < 1 or not (math.isfinite(lo) and math.isfinite(hi)):
        raise UsageError("grid needs n >= 1 and finite bounds")
    return np.linspace(lo, hi, n)


def _fig6_point(p, lg):
    g = 10.0 ** lg
    try:
        eta = channel_point(p, distance_for_gain(p, g)).eta_sys
        honest = expected_coincidence_rate(p, eta)
    except OutOfRangeError:
        honest = math.nan
    try:
        att = attack.minimize_coincidences(p, g).g_zero_coin
    except attack.InfeasibleTargetError:
        att = math.nan
    return (lg, _log10(att) if att == att else att, _log10(honest) if honest == honest else honest)


def _fig8_point(p, lg):
    g = 10.0 ** lg
    try:
        eta = channel_point(p, distance_for_gain(p, g)).eta_sys
        honest = bounds.honest_decoy_ratio(p, eta)
    except OutOfRangeError:
        honest = math.nan
    try:
        r = attack.maximize_decoy_rate(p, g)
        ratio = r.g_zero_decoy / r.g_zero
    except attack.InfeasibleTargetError:
        ratio = math.nan
    return (lg, _log10(ratio) if ratio == ratio else ratio, _log10(honest) if honest == honest else honest)


@dataclass(frozen=True)
class _Point:
    fn: str
    params: ExperimentalParams

    def __call__(self, x):
        return {"fig6": _fig6_point, "fig8": _fig8_point}[self.fn](self.params, x)


SWEEP_HEADERS = {
    "fig6": ("log10_g_zero", "log10_min_g_coin", "log10_honest_g_coin"),
    "fig8": ("log10_g_zero", "log10_max_ratio", "log10_honest_ratio"),
    "fig9": ("log10_eta", "log10_r_upp", "log10_linear_ref", "log10_quadratic_ref"),
    "fig11": ("log10_eta", "log10_r_upp", "log10_linear_ref", "log10_quadratic_ref"),
}


def cmd_sweep(args) -> int:
    t0 = time.perf_counter()
    grid = parse_grid(args.grid)
    params, digest = _read_config(args.config)
    if not 0 <= args.row < len(params):
        raise UsageError(f"row {args.row} not in config")
    p = params[args.row]
    manifest = RunManifest(f"sweep {args.figure} row={args.row} grid={args.grid}", digest)
    pool = ProcessPoolExecutor(args.jobs) if args.jobs > 1 else None
    mapper = pool.map if pool else map
    try:
        if args.figure in ("fig6", "fig8"):
            rows = list(mapper(_Point(args.figure, p), grid.tolist()))
        else:
            variant = "decoy" if args.figure == "fig9" else "four-state"
            if variant == "four-state" and not p.four_state:
                raise ConfigError("fig11 needs f_d and f_v in the config")
            eta = 10.0 ** grid
            if np.any(eta > 1):
                raise UsageError("fig9/fig11 grid is log10(eta) and must be <= 0")
            curve = bounds.upper_bound_curve(p, eta, variant, mapper=mapper)
            lin, quad = curve.linear_reference(), curve.quadratic_reference()
            rows = [(le, _log10(r), _log10(a), _log10(b))
                    for le, r, a, b in zip(grid, curve.r_upp, lin, quad)]
            manifest.rows.append({"exponent": curve.exponent, "fit_window_log10_eta": list(curve.fit_window)})
    finally:
        if pool:
            pool.shutdown()
    manifest.rows.extend({"index": i, "x": float(r[0])} for i, r in enumerate(rows))
    _emit(_csv_text(SWEEP_HEADERS[args.figure], rows), args.out, manifest, t0)
    return 0


# ---------------------------------------------------------------------- usd


def cmd_usd(args) -> int:
    if args.four_state:
        if args.fd is None or args.fv is None:
            raise UsageError("--four-state needs --fd and --fv")
        sol = four_state_usd(args.mu, args.fd, args.fv)
    elif args.zeta is not None:
        sol = tunable_usd(args.mu, args.f, args.zeta)
    else:
        sol = three_state_usd(args.mu, args.f)
    print(json.dumps(sol.as_dict(), indent=2, sort_keys=True))
    return 0


# ------------------------------------------------------------- oracle-check


def cmd_oracle_check(args) -> int:
    if args.cases < 1:
        raise UsageError("--cases must be >= 1")
    report = oracle.run_checks(args.seed, args.cases, perturb=args.inject_fault)
    print(oracle.format_report(report, ORACLE_TOL))
    return 0 if all(dev <= ORACLE_TOL for dev, _ in report.values()) else 1


# ------------------------------------------------------------------ parsing


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cowlab", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"cowlab {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    r = sub.add_parser("reproduce", help="recompute a results table")
    r.add_argument("table", choices=("table3", "table4", "table5"))
    r.add_argument("--config", help="JSON parameter file (default: bundled experimental rows)")
    r.add_argument("--out", help="CSV path (default: stdout)")
    r.set_defaults(func=cmd_reproduce)

    s = sub.add_parser("sweep", help="tabulate a figure's curves")
    s.add_argument("figure", choices=tuple(SWEEP_HEADERS))
    s.add_argument("--config")
    s.add_argument("--grid", required=True, help="lo:hi:n in log10 G_zero (fig6/8) or log10 eta (fig9/11)")
    s.add_argument("--row", type=int, default=0, help="config row to use")
    s.add_argument("--jobs", type=int, default=1)
    s.add_argument("--out")
    s.set_defaults(func=cmd_sweep)

    u = sub.add_parser("usd", help="print an optimal USD measurement as JSON")
    u.add_argument("--mu", type=float, required=True)
    u.add_argument("--f", type=float, default=0.155)
    u.add_argument("--zeta", type=float)
    u.add_argument("--four-state", action="store_true")
    u.add_argument("--fd", type=float)
    u.add_argument("--fv", type=float)
    u.set_defaults(func=cmd_usd)

    o = sub.add_parser("oracle-check", help="closed forms against brute force")
    o.add_argument("--seed", type=int, default=1)
    o.add_argument("--cases", type=int, default=100)
    o.add_argument("--inject-fault", type=float, default=0.0, help=argparse.SUPPRESS)
    o.set_defaults(func=cmd_oracle_check)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        return args.func(args)
    except (ConfigError, UsageError, ValueError) as exc:
        print(f"cowlab: error: {exc}", file=sys.stderr)
        return 2
    except bounds.NoCrossingError as exc:
        print(f"cowlab: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
