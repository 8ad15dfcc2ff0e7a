"""One executable, one experiment per subcommand.

Configuration comes from a YAML (or JSON) document of key-value pairs;
`--set key=value` overrides individual keys from the command line. Every run
writes a manifest (validated config echo, code version, wall time), CSV
series with exact-round-trip floats, and a verdicts document for any bound
checks it performed.

Exit codes: 0 success, 1 usage/configuration error, 2 numerical failure,
3 a bound check failed.
"""
from __future__ import annotations

import argparse
import math
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from . import eigen as eigenmod
from . import linear
from . import sim as simmod
from . import toy as toymod
from . import output
from .diagnostics import CheckReport, NormSeries, fit_power_law
from .params import PhysicalParams
from .spectral import Mode, ModeState, symbol_p

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_CHECK = 3

_REQUIRED = object()


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class Key:
    typ: object
    default: object = _REQUIRED
    check: tuple = ()          # (predicate, message)
    help: str = ""


def _coerce(val, typ, name):
    if typ is float:
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise ConfigError(f"{name} must be a number (got {val!r})")
        return float(val)
    if typ is int:
        if isinstance(val, bool) or not isinstance(val, int):
            raise ConfigError(f"{name} must be an integer (got {val!r})")
        return val
    if typ is bool:
        if not isinstance(val, bool):
            raise ConfigError(f"{name} must be a boolean (got {val!r})")
        return val
    if typ is str:
        if not isinstance(val, str):
            raise ConfigError(f"{name} must be a string (got {val!r})")
        return val
    if typ is list:
        if not isinstance(val, (list, tuple)):
            raise ConfigError(f"{name} must be a list (got {val!r})")
        return [float(x) for x in val]
    raise AssertionError(f"unhandled schema type {typ}")


def validate_config(schema: dict, doc: dict, path: str = "") -> dict:
    if not isinstance(doc, dict):
        raise ConfigError(f"configuration section '{path or '.'}' must be a "
                          "mapping")
    unknown = sorted(set(doc) - set(schema))
    if unknown:
        raise ConfigError(f"unknown key '{path}{unknown[0]}'")
    out = {}
    for name, spec in schema.items():
        if name in doc:
            val = _coerce(doc[name], spec.typ, f"{path}{name}")
        elif spec.default is _REQUIRED:
            raise ConfigError(f"missing required key '{path}{name}'")
        else:
            val = spec.default
        if spec.check and val is not None and not spec.check[0](val):
            raise ConfigError(f"{path}{name} {spec.check[1]} (got {val!r})")
        out[name] = val
    return out


_POS = (lambda v: v > 0, "must be > 0")
_NONNEG = (lambda v: v >= 0, "must be >= 0")

_COMMON_PHYSICS = {
    "beta": Key(float, check=_POS, help="buoyancy frequency"),
    "nu": Key(float, 0.0, _NONNEG, "viscosity"),
    "kappa": Key(float, 0.0, _NONNEG, "diffusivity"),
}

SCHEMAS: dict[str, dict] = {
    "linear-mode": {
        **_COMMON_PHYSICS,
        "k": Key(int, 1, (lambda v: v != 0, "must be nonzero")),
        "eta": Key(float, 0.0),
        "omega0": Key(list, [1.0, 0.0]),
        "theta0": Key(list, [0.0, 0.0]),
        "t_end": Key(float, 100.0, _POS),
        "samples": Key(int, 201, (lambda v: v >= 2, "must be >= 2")),
        "tol": Key(float, 1e-10, _POS),
        "slack": Key(float, 1e-6, _POS),
        "check": Key(str, "auto", (lambda v: v in (
            "auto", "none", "inviscid", "dissipative", "zero-diffusivity"),
            "must be one of auto|none|inviscid|dissipative|zero-diffusivity")),
        "c_margin": Key(float, 100.0, _POS),
        "sweep": Key(int, 0, _NONNEG, "random envelope sweep size (0 = off)"),
        "sweep_beta": Key(list, [0.51, 10.0]),
        "sweep_k": Key(list, [1.0, 8.0]),
        "sweep_eta": Key(list, [-50.0, 50.0]),
    },
    "linear-field": {
        **_COMMON_PHYSICS,
        "nk": Key(int, 256, (lambda v: v >= 4, "must be >= 4")),
        "neta": Key(int, 512, (lambda v: v >= 4, "must be >= 4")),
        "ly": Key(float, 4.0 * math.pi, _POS),
        "eps": Key(float, 1e-2, _POS),
        "width": Key(float, 1.0, _POS),
        "t_end": Key(float, 100.0, _POS),
        "samples": Key(int, 51, (lambda v: v >= 2, "must be >= 2")),
        "tol": Key(float, 1e-8, _POS),
    },
    "eigen": {
        "problem": Key(str, "taylor-goldstein", (lambda v: v in (
            "taylor-goldstein", "rayleigh-taylor"),
            "must be taylor-goldstein or rayleigh-taylor")),
        "beta_sq": Key(float),
        "k": Key(int, 1, (lambda v: v != 0, "must be nonzero")),
        "height": Key(float, 1.0, _POS),
        "n_modes": Key(int, 8, _POS),
        "n_grid": Key(int, 256, (lambda v: v >= 64, "must be >= 64")),
        "profile": Key(str, "couette", (lambda v: v in (
            "couette", "rest", "linear"),
            "must be couette, rest or linear")),
        "shear_rate": Key(float, 1.0),
    },
    "toy": {
        "eps": Key(float, 1e-3, _POS),
        "eta": Key(float, 0.0, _NONNEG, "single-window eta (0 = off)"),
        "k": Key(int, 0, _NONNEG, "single-window k (0 = off)"),
        "tol": Key(float, 1e-10, _POS),
        "ratios": Key(list, []),
        "delta": Key(float, 1.0, _POS,
                     "perturbative time-scale budget eps^2 eta/k"),
        "cascade_eta": Key(list, []),
        "cascade_c": Key(float, 2.0,
                         (lambda v: 1.0 < v < 4.0, "must lie in (1, 4)")),
        "stirling_rtol": Key(float, 0.2, _POS),
    },
    "nonlinear": {
        **_COMMON_PHYSICS,
        "nx": Key(int, 128),
        "ny": Key(int, 256),
        "ly": Key(float, 4.0 * math.pi, _POS),
        "dt": Key(float, 0.02, _POS),
        "t_end": Key(float, 50.0, _POS),
        "eps": Key(float, 1e-2, _POS),
        "width": Key(float, 1.0, _POS),
        "nonlinear": Key(bool, True),
        "dealias_fraction": Key(float, 2.0 / 3.0),
        "remesh_threshold": Key(float, 2.0, _POS),
        "sample_interval": Key(float, 1.0, _POS),
        "energy_check": Key(bool, True),
        "energy_rtol": Key(float, 1e-6, _POS),
        "snapshots": Key(bool, False),
        "snapshot_interval": Key(float, 10.0, _POS),
    },
    "fit": {
        "input": Key(str),
        "label": Key(str),
        "t_lo": Key(float, 10.0, _POS),
        "t_hi": Key(float, 100.0, _POS),
        "expected": Key(float, None),
        "tol_exponent": Key(float, 0.1, _POS),
    },
}


def _params_from(cfg) -> PhysicalParams:
    try:
        return PhysicalParams(beta=cfg["beta"], nu=cfg["nu"],
                              kappa=cfg["kappa"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _cpair(v) -> complex:
    return complex(v[0], v[1] if len(v) > 1 else 0.0)


def _run_linear_mode(cfg, outdir: Path, rng, quiet):
    params = _params_from(cfg)
    check = cfg["check"]
    if check == "auto":
        if params.nu == 0 and params.kappa == 0:
            check = "inviscid" if params.beta > 0.5 else "none"
        elif params.kappa == 0:
            check = "zero-diffusivity"
        elif params.enhanced_ok:
            check = "dissipative"
        else:
            check = "none"
    if check == "inviscid" and not (params.nu == 0 and params.kappa == 0):
        raise ConfigError("inviscid check requires nu = kappa = 0")
    if check == "dissipative" and not params.enhanced_ok:
        raise ConfigError(
            "enhanced dissipation requires nu, kappa > 0 with "
            "max(nu,kappa)/min(nu,kappa) < 4*beta - 1; "
            f"got nu={params.nu:g}, kappa={params.kappa:g}, "
            f"beta={params.beta:g}")
    if check == "zero-diffusivity" and not (params.kappa == 0 and params.nu > 0):
        raise ConfigError("zero-diffusivity check requires kappa = 0, nu > 0")

    reports = []
    outputs = []
    times = np.linspace(0.0, cfg["t_end"], cfg["samples"])

    mode = Mode(k=cfg["k"], eta=cfg["eta"])
    state0 = ModeState(_cpair(cfg["omega0"]), _cpair(cfg["theta0"]), 0.0)
    traj = [state0] + linear.mode_trajectory(state0, mode, params,
                                             times[1:], tol=cfg["tol"])
    series = []
    if mode.k != 0 and params.beta > 0.5:
        zq = [linear.zq_squared(s, mode, params) for s in traj]
        series.append(NormSeries("zq_sq", times, np.array(zq)))
        en = [linear.energy_functional(
            linear.to_symmetric(s, mode, params), mode, params).e
            for s in traj]
        series.append(NormSeries("energy_E", times, np.array(en)))
    series.append(NormSeries("abs_omega", times,
                             np.array([abs(s.omega) for s in traj])))
    series.append(NormSeries("p_abs_omega", times, np.array(
        [symbol_p(s.t, mode.k, mode.eta) * abs(s.omega) for s in traj])))
    csv = outdir / "series.csv"
    output.write_series_csv(csv, series)
    outputs.append(csv)

    if check in ("inviscid", "dissipative"):
        reports.append(linear.check_energy_envelope(
            traj, mode, params, slack=cfg["slack"]))
    elif check == "zero-diffusivity":
        reports.append(linear.check_vorticity_decay(
            traj, mode, params, c_margin=cfg["c_margin"]))

    if cfg["sweep"] > 0:
        blo, bhi = cfg["sweep_beta"]
        klo, khi = cfg["sweep_k"]
        elo, ehi = cfg["sweep_eta"]
        rows = ["beta,k,eta,margin,passed"]
        worst = math.inf
        all_ok = True
        for _ in range(cfg["sweep"]):
            b = rng.uniform(blo, bhi)
            kk = int(rng.integers(int(klo), int(khi) + 1))
            ee = rng.uniform(elo, ehi)
            om = complex(rng.normal(), rng.normal())
            th = complex(rng.normal(), rng.normal())
            nrm = math.sqrt(abs(om) ** 2 + abs(th) ** 2)
            p_s = PhysicalParams(beta=b, nu=params.nu, kappa=params.kappa)
            m_s = Mode(k=kk, eta=ee)
            tr = linear.mode_trajectory(ModeState(om / nrm, th / nrm, 0.0),
                                        m_s, p_s, times[1:], tol=cfg["tol"])
            rep = linear.check_energy_envelope(
                [ModeState(om / nrm, th / nrm, 0.0)] + tr, m_s, p_s,
                slack=cfg["slack"])
            worst = min(worst, rep.margin)
            all_ok = all_ok and rep.passed
            rows.append(f"{output.format_float(b)},{kk},"
                        f"{output.format_float(ee)},"
                        f"{output.format_float(rep.margin)},{rep.passed}")
        sweep_csv = outdir / "sweep.csv"
        sweep_csv.write_text("\n".join(rows) + "\n")
        outputs.append(sweep_csv)
        reports.append(CheckReport(
            name="envelope sweep", passed=all_ok, margin=worst,
            details=f"{cfg['sweep']} random modes"))
    return reports, outputs, series


def _run_linear_field(cfg, outdir: Path, rng, quiet):
    params = _params_from(cfg)
    field0 = simmod.gaussian_density_field(
        cfg["nk"], cfg["neta"], cfg["ly"], cfg["eps"], cfg["width"])
    times = np.linspace(0.0, cfg["t_end"], cfg["samples"])[1:]  # skip t = 0
    _, norms = linear.evolve_field_linear(field0, params, times,
                                          tol=cfg["tol"], keep_fields=False)
    csv = outdir / "norms.csv"
    output.write_series_csv(csv, list(norms.values()))
    return [], [csv], list(norms.values())


def _run_eigen(cfg, outdir: Path, rng, quiet):
    if cfg["problem"] == "rayleigh-taylor":
        res = eigenmod.rayleigh_taylor_spectrum(
            cfg["beta_sq"], cfg["k"], cfg["height"], cfg["n_modes"],
            n_grid=cfg["n_grid"])
        profile = None
    else:
        if cfg["profile"] == "couette":
            profile = eigenmod.couette(cfg["height"])
        elif cfg["profile"] == "rest":
            profile = eigenmod.ShearProfile(
                u=lambda y: 0.0 * y, u_second=lambda y: 0.0 * y,
                u_prime=lambda y: 0.0 * y, y_range=(0.0, cfg["height"]),
                description="rest state")
        else:
            a = cfg["shear_rate"]
            profile = eigenmod.ShearProfile(
                u=lambda y: a * y, u_second=lambda y: 0.0 * y,
                u_prime=lambda y: a + 0.0 * y, y_range=(0.0, cfg["height"]),
                description=f"linear shear U = {a:g} y")
        res = eigenmod.taylor_goldstein_spectrum(
            profile, cfg["beta_sq"], cfg["k"], n_grid=cfg["n_grid"])

    order = np.lexsort((res.eigenvalues.imag, -res.eigenvalues.real))
    lines = ["re,im,residual"]
    for i in order:
        lines.append(f"{output.format_float(res.eigenvalues[i].real)},"
                     f"{output.format_float(res.eigenvalues[i].imag)},"
                     f"{output.format_float(res.residuals[i])}")
    csv = outdir / "eigenvalues.csv"
    csv.write_text("\n".join(lines) + "\n")

    reports = [CheckReport(
        name="spectral stability classification",
        passed=True,
        margin=res.growth_rate(),
        details=f"{res.classification} (stability_tol "
                f"{res.stability_tol:.3g}, n_grid {res.n_grid})")]
    if profile is not None:
        min_ri, holds = eigenmod.richardson_number(profile, cfg["beta_sq"])
        consistent = (not holds) or res.stable
        reports.append(CheckReport(
            name="Richardson screening vs classification",
            passed=consistent, margin=min_ri,
            details=f"min Ri = {min_ri:.6g}; criterion "
                    f"{'holds' if holds else 'does not hold'}"))
    return reports, [csv], []


def _run_toy(cfg, outdir: Path, rng, quiet):
    reports = []
    outputs = []
    series = []
    if cfg["eta"] > 0 and cfg["k"] > 0:
        p = toymod.ToyParams(eps=cfg["eps"], eta=cfg["eta"], k=cfg["k"])
        traj = toymod.evolve_toy(p, tol=cfg["tol"])
        series = [NormSeries("abs_z_k", traj.t, np.abs(traj.z_k)),
                  NormSeries("abs_z_km1", traj.t, np.abs(traj.z_km1))]
        csv = outdir / "trajectory.csv"
        output.write_series_csv(csv, series)
        outputs.append(csv)
        gain = toymod.amplification(traj, abs(p.z_k0) + abs(p.z_km10))
        reports.append(CheckReport(
            name="window amplification", passed=gain >= 1.0, margin=gain,
            details=f"eta/k^2 = {p.ratio:g}"))
    if cfg["ratios"]:
        rows = toymod.amplification_sweep(cfg["ratios"], cfg["eps"],
                                          cfg["delta"], cfg["tol"])
        lines = ["ratio,k,eta,gain"]
        for r, k, eta, gain in rows:
            lines.append(f"{output.format_float(r)},{k},"
                         f"{output.format_float(eta)},"
                         f"{output.format_float(gain)}")
        csv = outdir / "sweep.csv"
        csv.write_text("\n".join(lines) + "\n")
        outputs.append(csv)
        c = toymod.fit_exponent_from_gains([r[0] for r in rows],
                                           [r[3] for r in rows])
        reports.append(CheckReport(
            name="amplification exponent in (1,4)",
            passed=1.0 < c < 4.0, margin=c,
            details=f"fitted c = {c:.4g} at eps = {cfg['eps']:g}, "
                    f"delta = {cfg['delta']:g}"))
    for eta in cfg["cascade_eta"]:
        rep = toymod.cascade_gain(eta, cfg["cascade_c"])
        rel = abs(rep.log_total_gain - rep.stirling_log) / rep.stirling_log
        reports.append(CheckReport(
            name=f"cascade total vs Stirling envelope (eta={eta:g})",
            passed=rel <= cfg["stirling_rtol"], margin=rel,
            details=f"log total {rep.log_total_gain:.6g}, Stirling "
                    f"{rep.stirling_log:.6g}"))
    return reports, outputs, series


def _run_nonlinear(cfg, outdir: Path, rng, quiet):
    params = _params_from(cfg)
    try:
        sim_cfg = simmod.SimConfig(
            nx=cfg["nx"], ny=cfg["ny"], params=params, dt=cfg["dt"],
            t_end=cfg["t_end"], ly=cfg["ly"],
            dealias_fraction=cfg["dealias_fraction"],
            remesh_threshold=cfg["remesh_threshold"],
            nonlinear=cfg["nonlinear"], eps=cfg["eps"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None

    outputs = []
    snap_state = {"next": 0.0, "idx": 0}

    def sink(st):
        if not cfg["snapshots"] or st.t + 1e-12 < snap_state["next"]:
            return
        f = st.field
        n = f.nk * f.neta
        om = np.fft.ifft2(f.omega).real * n
        th = np.fft.ifft2(f.theta).real * n
        idx = snap_state["idx"]
        snap = outdir / f"snapshot_{idx:04d}.bin"
        output.write_snapshot(snap, om, th, st.t, params.beta, params.nu,
                              params.kappa)
        pgm_o = outdir / f"omega_{idx:04d}.pgm"
        pgm_t = outdir / f"theta_{idx:04d}.pgm"
        output.write_pgm(pgm_o, om)
        output.write_pgm(pgm_t, th)
        outputs.extend([snap, pgm_o, pgm_t])
        snap_state["idx"] += 1
        snap_state["next"] = st.t + cfg["snapshot_interval"]

    state0 = simmod.gaussian_density_state(sim_cfg, width=cfg["width"])
    final, series = simmod.run(sim_cfg, state0,
                               sample_interval=cfg["sample_interval"],
                               sink=sink)
    csv = outdir / "norms.csv"
    output.write_series_csv(csv, list(series.values()))
    outputs.append(csv)

    reports = []
    if cfg["energy_check"] and params.inviscid:
        h = series["energy"]
        s = series["stress_integral"]
        dh = np.diff(h.value)
        ds = np.diff(s.value)
        scale = np.maximum(np.abs(h.value[1:]), 1e-300)
        resid = float(np.max(np.abs(dh - ds) / scale)) if dh.size else 0.0
        reports.append(CheckReport(
            name="energy balance dH/dt = -int(u^x u^y)",
            passed=resid <= cfg["energy_rtol"], margin=resid,
            details=f"max |dH - dS|/|H| over sample intervals"))
    for w in final.truncation_warnings:
        reports.append(CheckReport(name="remesh truncation", passed=True,
                                   margin=0.0, details=w))
    return reports, outputs, list(series.values())


def _run_fit(cfg, outdir: Path, rng, quiet):
    series = output.read_series_csv(cfg["input"], cfg["label"])
    fit = fit_power_law(series, cfg["t_lo"], cfg["t_hi"])
    expected = cfg["expected"]
    if expected is None:
        passed, detail = True, "informational fit"
    else:
        passed = abs(fit.exponent - expected) <= cfg["tol_exponent"]
        detail = (f"expected {expected:g} +- {cfg['tol_exponent']:g}")
    rep = CheckReport(
        name=f"power-law exponent of {cfg['label']}",
        passed=passed, margin=fit.exponent,
        details=f"{detail}; stderr {fit.stderr:.3g}, "
                f"{fit.n_samples} samples in [{fit.window[0]:g}, "
                f"{fit.window[1]:g}]")
    return [rep], [], []


RUNNERS = {
    "linear-mode": _run_linear_mode,
    "linear-field": _run_linear_field,
    "eigen": _run_eigen,
    "toy": _run_toy,
    "nonlinear": _run_nonlinear,
    "fit": _run_fit,
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(EXIT_CONFIG)


def _build_parser() -> _Parser:
    parser = _Parser(prog="stratlab",
                     description="stratified-Couette stability experiments")
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in RUNNERS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", type=Path, default=None,
                       help="YAML/JSON configuration document")
        p.add_argument("--out", type=Path, default=None,
                       help="output directory (default stratlab-out/<name>)")
        p.add_argument("--seed", type=int, default=0,
                       help="seed for randomized sweeps")
        p.add_argument("--quiet", action="store_true")
        p.add_argument("--set", action="append", default=[], metavar="K=V",
                       help="override a config key (repeatable)")
    return parser


def _load_config(args) -> dict:
    doc = {}
    if args.config is not None:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        try:
            loaded = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError(f"malformed config document: {exc}") from None
        if loaded is None:
            loaded = {}
        if not isinstance(loaded, dict):
            raise ConfigError("config document must be a mapping")
        doc.update(loaded)
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set needs KEY=VALUE (got {item!r})")
        key, _, raw = item.partition("=")
        try:
            doc[key.strip()] = yaml.safe_load(raw)
        except yaml.YAMLError as exc:
            raise ConfigError(f"bad --set value for {key}: {exc}") from None
    return doc


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_CONFIG

    try:
        doc = _load_config(args)
        cfg = validate_config(SCHEMAS[args.experiment], doc)
    except ConfigError as exc:
        print(f"stratlab: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    outdir = args.out or Path("stratlab-out") / args.experiment
    outdir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(args.seed)
    started = time.perf_counter()
    try:
        reports, outputs, _ = RUNNERS[args.experiment](cfg, outdir, rng,
                                                       args.quiet)
    except ConfigError as exc:
        print(f"stratlab: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (linear.IntegratorStall, simmod.CflError, OverflowError,
            FloatingPointError, np.linalg.LinAlgError, RuntimeError,
            ValueError) as exc:
        print(f"stratlab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    wall = time.perf_counter() - started

    verdicts_path = outdir / "verdicts.json"
    all_ok = output.write_verdicts(verdicts_path, reports)
    outputs = list(outputs) + [verdicts_path]
    manifest = outdir / "manifest.json"
    output.write_manifest(manifest, args.experiment, cfg, args.seed, wall,
                          outputs)
    if not args.quiet:
        for r in reports:
            status = "PASS" if r.passed else "FAIL"
            print(f"[{status}] {r.name}: margin {r.margin:.6g} {r.details}")
        print(f"stratlab {args.experiment}: wrote {len(outputs) + 1} files "
              f"to {outdir} ({wall:.2f}s)")
    return EXIT_OK if all_ok else EXIT_CHECK


if __name__ == "__main__":
    sys.exit(main())
