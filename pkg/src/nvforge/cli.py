"""Command-line front end.

Subcommands: ``odmr``, ``decay``, ``fit``, ``sense``, ``implant``, ``scan``,
``fixtures``.  Every physical option carries its unit in the flag name
(``--tau-s``, ``--bz-t``, ``--dose-cm2``, ...) and has a one-to-one config
file counterpart (see :mod:`nvforge.config`); explicit flags override file
values.  The environment variable ``NVFORGE_SEED`` overrides the master
seed from either source.

Exit codes: 0 success, 2 configuration error, 3 acceptance-check failure
(engine disagreement beyond tolerance), 4 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, dataio, fitkit, fixtures, implant, magnetometry, presets
from .config import ConfigError, parse_config_file, resolve_options
from .engines import decay_time_grid, simulate_analytic, simulate_mc
from .levmar import NumericalFailure
from .noise import NoiseModel
from .scan import (
    DepthProfileError,
    MissingZplError,
    charge_ratio,
    detect_spots,
    film_thickness,
    identify_peaks,
    purity_report,
    van_der_pauw,
)
from .sequences import build_sequence
from .spincore import MagneticFieldVector, SpinParams, odmr_spectrum

DEFAULT_SEED = 12345
ENGINE_RMS_TOLERANCE = 0.02


class EngineMismatchError(RuntimeError):
    """Monte-Carlo and analytic engines disagree beyond tolerance."""


def _bool(raw) -> bool:
    if isinstance(raw, bool):
        return raw
    lowered = str(raw).lower()
    if lowered in ("true", "1", "yes", "on"):
        return True
    if lowered in ("false", "0", "no", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got {raw!r}")


# Option specs: name -> (type, default, help).  Names double as config keys.
ODMR_OPTIONS = {
    "bx_t": (float, 0.0, "field x component (T)"),
    "by_t": (float, 0.0, "field y component (T)"),
    "bz_t": (float, 1.6e-3, "field z component (T)"),
    "zfs_d_hz": (float, 2.87e9, "zero-field splitting D (Hz)"),
    "gamma_hz_per_t": (float, 2.8024e10, "gyromagnetic ratio (Hz/T)"),
    "linewidth_hz": (float, 6e6, "dip FWHM (Hz)"),
    "contrast": (float, 0.15, "total ODMR contrast"),
    "f_min_hz": (float, None, "grid start (default: auto)"),
    "f_max_hz": (float, None, "grid end (default: auto)"),
    "n_freq": (int, 2001, "number of grid points"),
}

DECAY_OPTIONS = {
    "sequence": (str, "hahn", "ramsey | hahn | cpmg | xy4 | xy8"),
    "n_pulses": (int, 1, "pi-pulse count for cpmg"),
    "engine": (str, "analytic", "mc | analytic | both"),
    "noise_preset": (str, "paper-like", "paper-like | slow-bath | none"),
    "b_rad_s": (float, None, "OU coupling (rad/s) when preset is none"),
    "tau_c_s": (float, None, "OU correlation time (s) when preset is none"),
    "t1_s": (float, None, "longitudinal time (s), omit for none"),
    "t1_q": (float, 1.0, "longitudinal stretching exponent"),
    "t_min_s": (float, None, "grid start (default: auto)"),
    "t_max_s": (float, None, "grid end (default: auto)"),
    "n_times": (int, 24, "number of time points"),
    "grid": (str, "log", "log | linear"),
    "n_traj": (int, 20000, "Monte-Carlo trajectories"),
}

FIT_OPTIONS = {
    "input": (str, None, "decay-curve CSV (time_s, signal)"),
    "model": (str, "stretched_exp", "exp_t2star | stretched_exp | t1_stretched | fid_beats"),
    "pin_offset": (_bool, False, "fix the baseline c at 0"),
}

SENSE_OPTIONS = {
    "preset": (str, "paper-ideal", "paper-ideal | none"),
    "aleph_ppm": (float, None, "NV concentration (ppm)"),
    "volume_m3": (float, None, "detection volume (m^3)"),
    "rate_cps": (float, None, "photon rate per center (counts/s)"),
    "contrast": (float, None, "readout contrast"),
    "t2_star_s": (float, None, "T2* (s); preset supplies 3.6e-6"),
    "t2_dd_s": (float, None, "decoupled T2 (s) for the AC estimate"),
}

IMPLANT_OPTIONS = {
    "energy_ev": (float, 5000.0, "ion energy (eV)"),
    "current_a": (float, 500e-12, "beam current (A)"),
    "diameter_m": (float, 25e-6, "spot or aperture diameter (m)"),
    "dose_cm2": (float, 1e12, "target atom dose (cm^-2)"),
    "chopper_pulse_s": (float, None, "beam-chopper pulse length (s)"),
    "species": (str, "atomic", "atomic | molecular"),
    "leak_sccm": (float, 2.4e-4, "chamber leak rate (sccm)"),
    "flow_sccm": (float, 400.0, "total process-gas flow (sccm)"),
    "h2_purity": (float, 1.0, "hydrogen purity fraction"),
    "ch4_purity": (float, 1.0, "methane purity fraction"),
    "incorporation_rate": (float, 1e-4, "gas-to-solid nitrogen incorporation rate"),
}

SCAN_OPTIONS = {
    "mode": (str, None, "spots | depth | spectrum | ratio | vdp | purity"),
    "input": (str, None, "input CSV (not used by vdp)"),
    "threshold_sigma": (float, 5.0, "spot detection threshold (sigma)"),
    "kappa": (float, 1.0, "charge-ratio calibration factor"),
    "r_a_ohm": (float, None, "Van-der-Pauw resistance A (ohm)"),
    "r_b_ohm": (float, None, "Van-der-Pauw resistance B (ohm)"),
}

FIXTURES_OPTIONS = {
    "target": (str, None, "fig5 | fig6 | fig7 | fig9 | raman | s1s2s3 | table2"),
}

COMMAND_OPTIONS = {
    "odmr": ODMR_OPTIONS,
    "decay": DECAY_OPTIONS,
    "fit": FIT_OPTIONS,
    "sense": SENSE_OPTIONS,
    "implant": IMPLANT_OPTIONS,
    "scan": SCAN_OPTIONS,
    "fixtures": FIXTURES_OPTIONS,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nvforge",
        description="NV-ensemble simulation and analysis toolkit",
    )
    parser.add_argument("--version", action="version", version=f"nvforge {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for command, options in COMMAND_OPTIONS.items():
        p = sub.add_parser(command, help=f"{command} subcommand")
        if command == "implant":
            p.add_argument(
                "action",
                choices=["plan", "budget"],
                help="plan: dose/depth/yield plan; budget: CVD nitrogen budget",
            )
        p.add_argument("--config", type=str, default=None, help="key=value config file")
        p.add_argument("--seed", type=int, default=None, help="master seed")
        p.add_argument(
            "--output-dir", type=str, default=None, help="output directory (default .)"
        )
        for name, (typ, default, help_text) in options.items():
            flag = "--" + name.replace("_", "-")
            p.add_argument(flag, type=typ, default=None, help=f"{help_text} [default: {default}]")
    return parser


def _resolve(args: argparse.Namespace, command: str) -> tuple[dict, int, Path, Path | None]:
    spec = {name: (typ, default) for name, (typ, default, _) in COMMAND_OPTIONS[command].items()}
    spec["seed"] = (int, DEFAULT_SEED)
    spec["output_dir"] = (str, ".")
    file_values: dict[str, str] = {}
    config_path = None
    if args.config is not None:
        config_path = Path(args.config)
        file_values = parse_config_file(config_path)
    flag_values = {name: getattr(args, name) for name in spec}
    opts = resolve_options(flag_values, file_values, spec)
    seed = int(opts.pop("seed"))
    env_seed = os.environ.get("NVFORGE_SEED")
    if env_seed is not None:
        try:
            seed = int(env_seed)
        except ValueError as exc:
            raise ConfigError(f"NVFORGE_SEED must be an integer, got {env_seed!r}") from exc
    out_dir = Path(opts.pop("output_dir"))
    out_dir.mkdir(parents=True, exist_ok=True)
    return opts, seed, out_dir, config_path


def _noise_from_options(opts: dict) -> NoiseModel:
    preset = opts["noise_preset"]
    if preset != "none":
        noise = presets.noise_preset(preset)
        if opts["t1_s"] is not None:
            noise = NoiseModel(noise.b_rad_s, noise.tau_c_s, opts["t1_s"], opts["t1_q"])
        return noise
    if opts["b_rad_s"] is None or opts["tau_c_s"] is None:
        raise ConfigError("noise-preset none requires b-rad-s and tau-c-s")
    t1 = opts["t1_s"] if opts["t1_s"] is not None else math.inf
    return NoiseModel(opts["b_rad_s"], opts["tau_c_s"], t1, opts["t1_q"])


def _cmd_odmr(opts: dict, seed: int, out_dir: Path) -> list[Path]:
    params = SpinParams(
        zfs_d_hz=opts["zfs_d_hz"],
        gyromag_hz_per_t=opts["gamma_hz_per_t"],
        linewidth_fwhm_hz=opts["linewidth_hz"],
        odmr_contrast=opts["contrast"],
    )
    field = MagneticFieldVector(opts["bx_t"], opts["by_t"], opts["bz_t"])
    f_min, f_max = opts["f_min_hz"], opts["f_max_hz"]
    if f_min is None or f_max is None:
        span = params.gyromag_hz_per_t * field.magnitude_t + 10 * params.linewidth_fwhm_hz
        f_min = params.zfs_d_hz - span if f_min is None else f_min
        f_max = params.zfs_d_hz + span if f_max is None else f_max
    if not f_max > f_min:
        raise ConfigError("f-max-hz must exceed f-min-hz")
    grid = np.linspace(f_min, f_max, int(opts["n_freq"]))
    spectrum = odmr_spectrum(params, field, grid)
    csv_path = out_dir / "odmr.csv"
    json_path = out_dir / "odmr_lines.json"
    dataio.write_odmr_csv(spectrum, csv_path)
    dataio.write_json(json_path, dataio.odmr_line_table(spectrum))
    return [csv_path, json_path]


def _decay_sequence(opts: dict):
    kind = opts["sequence"].lower()
    tau = 1e-6  # canonical spacing; engines rescale to each total time
    if kind == "cpmg":
        return build_sequence("cpmg", tau, n=int(opts["n_pulses"]))
    return build_sequence(kind, tau)


def _cmd_decay(opts: dict, seed: int, out_dir: Path) -> list[Path]:
    engine = opts["engine"].lower()
    if engine not in ("mc", "analytic", "both"):
        raise ConfigError("engine must be mc, analytic, or both")
    seq = _decay_sequence(opts)
    noise = _noise_from_options(opts)
    n_times = int(opts["n_times"])
    if (opts["t_min_s"] is None) != (opts["t_max_s"] is None):
        raise ConfigError("t-min-s and t-max-s must be given together")
    if opts["t_min_s"] is not None and opts["t_max_s"] is not None:
        if opts["grid"] == "linear":
            times = np.linspace(opts["t_min_s"], opts["t_max_s"], n_times)
        else:
            times = np.geomspace(opts["t_min_s"], opts["t_max_s"], n_times)
    else:
        times = decay_time_grid(seq, noise, n_points=n_times)

    outputs: list[Path] = []
    curves = {}
    if engine in ("analytic", "both"):
        curves["analytic"] = simulate_analytic(seq, noise, times)
    if engine in ("mc", "both"):
        curves["mc"] = simulate_mc(seq, noise, times, int(opts["n_traj"]), seed)
    for name, curve in curves.items():
        path = out_dir / f"decay_{name}.csv"
        dataio.write_decay_csv(curve, path)
        outputs.extend([path, path.with_suffix(".json")])
    if engine == "both":
        diff = curves["mc"].signal - curves["analytic"].signal
        rms = float(np.sqrt(np.mean(diff**2)))
        report_path = out_dir / "engine_comparison.json"
        dataio.write_json(
            report_path,
            {
                "rms_difference": rms,
                "tolerance": ENGINE_RMS_TOLERANCE,
                "within_tolerance": rms <= ENGINE_RMS_TOLERANCE,
            },
        )
        outputs.append(report_path)
        if rms > ENGINE_RMS_TOLERANCE:
            raise EngineMismatchError(
                f"engine RMS difference {rms:.4f} exceeds {ENGINE_RMS_TOLERANCE}"
            )
    return outputs


def _cmd_fit(opts: dict, seed: int, out_dir: Path) -> list[Path]:
    if not opts["input"]:
        raise ConfigError("fit requires --input")
    curve = dataio.read_decay_csv(Path(opts["input"]))
    kind = opts["model"]
    factories = {
        "exp_t2star": fitkit.FitModel.exp_t2star,
        "stretched_exp": fitkit.FitModel.stretched_exp,
        "t1_stretched": fitkit.FitModel.t1_stretched,
        "fid_beats": fitkit.FitModel.fid_beats,
    }
    if kind not in factories:
        raise ConfigError(f"unknown model {kind!r}; choose from {sorted(factories)}")
    fix = {"c": 0.0} if opts["pin_offset"] else None
    result = fitkit.fit(curve, factories[kind](), fix=fix)
    path = out_dir / "fit_result.json"
    dataio.write_json(path, result.as_dict())
    return [path]


def _cmd_sense(opts: dict, seed: int, out_dir: Path) -> list[Path]:
    if opts["preset"] == "paper-ideal":
        spot, t2_star = magnetometry.paper_ideal_spot()
        if opts["t2_star_s"] is not None:
            t2_star = opts["t2_star_s"]
    elif opts["preset"] == "none":
        required = ("aleph_ppm", "volume_m3", "rate_cps", "contrast", "t2_star_s")
        missing = [k for k in required if opts[k] is None]
        if missing:
            raise ConfigError(f"preset none requires: {', '.join(missing)}")
        spot = magnetometry.EnsembleSpot(
            concentration_aleph_ppm=opts["aleph_ppm"],
            detection_volume_m3=opts["volume_m3"],
            photon_rate_per_center_cps=opts["rate_cps"],
            contrast=opts["contrast"],
        )
        t2_star = opts["t2_star_s"]
    else:
        raise ConfigError("preset must be paper-ideal or none")
    report = magnetometry.sensitivity_report(spot, t2_star, opts["t2_dd_s"])
    path = out_dir / "sensitivity.json"
    dataio.write_json(path, report.as_dict())
    return [path]


def _cmd_implant(action: str, opts: dict, seed: int, out_dir: Path) -> list[Path]:
    if action == "plan":
        beam = implant.BeamConfig(
            energy_ev=opts["energy_ev"],
            current_a=opts["current_a"],
            spot_diameter_m=opts["diameter_m"],
            chopper_pulse_s=opts["chopper_pulse_s"],
            species=opts["species"],
        )
        plan = implant.build_plan(beam, opts["dose_cm2"])
        path = out_dir / "implant_plan.json"
        dataio.write_json(path, plan.as_dict())
        return [path]
    budget = implant.GrowthBudget(
        total_flow_sccm=opts["flow_sccm"],
        leak_rate_sccm=opts["leak_sccm"],
        h2_purity=opts["h2_purity"],
        ch4_purity=opts["ch4_purity"],
        incorporation_rate=opts["incorporation_rate"],
    )
    report = implant.nitrogen_budget(budget)
    path = out_dir / "nitrogen_budget.json"
    dataio.write_json(path, report.as_dict())
    return [path]


def _cmd_scan(opts: dict, seed: int, out_dir: Path) -> list[Path]:
    mode = opts["mode"]
    if mode is None:
        raise ConfigError("scan requires --mode")
    if mode == "vdp":
        if opts["r_a_ohm"] is None or opts["r_b_ohm"] is None:
            raise ConfigError("vdp mode requires r-a-ohm and r-b-ohm")
        rs, g = van_der_pauw(opts["r_a_ohm"], opts["r_b_ohm"])
        payload = {"sheet_resistance_ohm_sq": rs, "sheet_conductance_s_sq": g}
        path = out_dir / "scan_vdp.json"
        dataio.write_json(path, payload)
        return [path]
    if not opts["input"]:
        raise ConfigError(f"scan mode {mode!r} requires --input")
    in_path = Path(opts["input"])
    if mode == "spots":
        grid = dataio.read_scan_grid_csv(in_path)
        spots = detect_spots(grid, threshold_sigma=opts["threshold_sigma"])
        payload = {"spots": [s.as_dict() for s in spots]}
        path = out_dir / "scan_spots.json"
    elif mode == "depth":
        profile = dataio.read_depth_profile_csv(in_path)
        payload = film_thickness(profile).as_dict()
        path = out_dir / "scan_depth.json"
    elif mode == "spectrum":
        spec = dataio.read_spectrum_csv(in_path)
        payload = {"peaks": [p.as_dict() for p in identify_peaks(spec)]}
        path = out_dir / "scan_spectrum.json"
    elif mode == "ratio":
        spec = dataio.read_spectrum_csv(in_path)
        ratio = charge_ratio(spec, kappa=opts["kappa"])
        payload = {"ratio_c0_cminus": ratio.ratio_c0_cminus, "kappa": ratio.kappa}
        path = out_dir / "scan_ratio.json"
    elif mode == "purity":
        grid = dataio.read_scan_grid_csv(in_path)
        payload = purity_report(grid).as_dict()
        path = out_dir / "scan_purity.json"
    else:
        raise ConfigError(f"unknown scan mode {mode!r}")
    dataio.write_json(path, payload)
    return [path]


def _cmd_fixtures(opts: dict, seed: int, out_dir: Path) -> list[Path]:
    target = opts["target"]
    outputs: list[Path] = []
    if target == "fig5":
        grid = fixtures.spot_grid_fig5(seed)
        path = out_dir / "fig5_spot_grid.csv"
        dataio.write_scan_grid_csv(grid, path)
        outputs.append(path)
    elif target == "fig6":
        profile = fixtures.depth_profile_fig6(seed)
        path = out_dir / "fig6_depth_profile.csv"
        dataio.write_depth_profile_csv(profile, path)
        outputs.append(path)
    elif target == "fig7":
        for n, curve in fixtures.decay_family_fig7():
            path = out_dir / f"fig7_cpmg{n:02d}.csv"
            dataio.write_decay_csv(curve, path)
            outputs.extend([path, path.with_suffix(".json")])
    elif target == "fig9":
        for kind, curve in fixtures.xy_curves_fig9().items():
            path = out_dir / f"fig9_{kind}.csv"
            dataio.write_decay_csv(curve, path)
            outputs.extend([path, path.with_suffix(".json")])
    elif target == "raman":
        path = out_dir / "raman_spectrum.csv"
        dataio.write_spectrum_csv(fixtures.raman_spectrum(), path)
        outputs.append(path)
    elif target == "s1s2s3":
        for sample in ("s1", "s2", "s3"):
            path = out_dir / f"spectrum_{sample}.csv"
            dataio.write_spectrum_csv(fixtures.spectrum_s123(sample), path)
            outputs.append(path)
    elif target == "table2":
        path = out_dir / "table2_samples.json"
        dataio.write_json(path, fixtures.table2_metadata())
        outputs.append(path)
    else:
        raise ConfigError(
            "unknown fixtures target "
            f"{target!r}; choose from fig5, fig6, fig7, fig9, raman, s1s2s3, table2"
        )
    return outputs


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write_manifest(
    out_dir: Path,
    command: str,
    opts: dict,
    seed: int,
    inputs: list[Path],
    outputs: list[Path],
    wall_time_s: float,
) -> None:
    manifest = {
        "tool": "nvforge",
        "version": __version__,
        "command": command,
        "options": {k: (v if v is None or isinstance(v, (int, float, bool)) else str(v)) for k, v in opts.items()},
        "seed": seed,
        "input_hashes": {str(p): _sha256(p) for p in inputs if p is not None and p.exists()},
        "outputs": sorted(p.name for p in outputs),
        "wall_time_s": wall_time_s,
    }
    dataio.write_json(out_dir / "manifest.json", manifest)


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    started = time.monotonic()
    try:
        opts, seed, out_dir, config_path = _resolve(args, args.command)
        if args.command == "odmr":
            outputs = _cmd_odmr(opts, seed, out_dir)
        elif args.command == "decay":
            outputs = _cmd_decay(opts, seed, out_dir)
        elif args.command == "fit":
            outputs = _cmd_fit(opts, seed, out_dir)
        elif args.command == "sense":
            outputs = _cmd_sense(opts, seed, out_dir)
        elif args.command == "implant":
            outputs = _cmd_implant(args.action, opts, seed, out_dir)
        elif args.command == "scan":
            outputs = _cmd_scan(opts, seed, out_dir)
        else:
            outputs = _cmd_fixtures(opts, seed, out_dir)
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except EngineMismatchError as exc:
        print(f"acceptance check failed: {exc}", file=sys.stderr)
        return 3
    except (NumericalFailure, fitkit.FitError, DepthProfileError, MissingZplError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 4

    inputs = [config_path]
    if "input" in opts and opts.get("input"):
        inputs.append(Path(opts["input"]))
    _write_manifest(
        out_dir, args.command, opts, seed, inputs, outputs, time.monotonic() - started
    )
    for path in outputs:
        print(path)
    return 0


def run() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    run()
