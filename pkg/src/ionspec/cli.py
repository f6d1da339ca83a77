"""Command line entry point: ``ionspec run | converge | presets``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, load, loads
from .convergence import convergence_report
from .experiments import ResourceLimitError, RunResult, run_experiment
from .spectra import arcsinh_rescale, export_spectrum, peak_to_dict, write_grid_csv
from .spins import write_gate_scan

log = logging.getLogger("ionspec")

EXIT_OK, EXIT_FAILURE, EXIT_CONFIG = 0, 1, 2


def preset_names() -> list:
    files = resources.files("ionspec").joinpath("presets").iterdir()
    return sorted(f.name[:-5] for f in files if f.name.endswith(".json"))


def preset_text(name: str) -> str:
    path = resources.files("ionspec").joinpath("presets", f"{name}.json")
    if not path.is_file():
        raise ConfigError(f"no preset named {name!r}; see `ionspec presets list`")
    return path.read_text()


def _dump_json(path: Path, data) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")


def write_outputs(res: RunResult, out: Path) -> list:
    """Write CSV/JSON artifacts for ``res`` under ``out``; returns the file list."""
    out.mkdir(parents=True, exist_ok=True)
    cfg = res.config
    prefix = out / cfg["output"]["prefix"]
    files = []
    if res.signal is not None:
        ta, tb = res.signal.axis_a.values, res.signal.axis_b.values
        for part, fn in (("re", np.real), ("im", np.imag)):
            name = f"{prefix}_signal_{part}.csv"
            write_grid_csv(name, ta, tb, fn(res.signal.values))
            files.append(name)
    if res.spectrum is not None:
        meta = {"config_name": cfg["name"], "experiment": cfg["experiment"],
                "grid": cfg["grid"], "eta": cfg["spectrum"]["eta"],
                "pad_factor": cfg["spectrum"]["pad_factor"], "axes": cfg["spectrum"]["axes"],
                "units": "nu_x" if cfg["experiment"] in ("sqc", "dqc") else "Omega"}
        files += export_spectrum(res.spectrum, f"{prefix}_spectrum", None, meta)
        scale = cfg["spectrum"].get("arcsinh_scale")
        if scale:
            disp = arcsinh_rescale(res.spectrum, scale)
            name = f"{prefix}_spectrum_arcsinh.csv"
            write_grid_csv(name, disp.freq_a.values, disp.freq_b.values, np.real(disp.values))
            files.append(name)
    if res.spectrum is not None and cfg["spectrum"]["axes"] == "both":
        name = Path(f"{prefix}_peaks.json")
        _dump_json(name, {"threshold": cfg["spectrum"]["peak_threshold"],
                          "peaks": [peak_to_dict(p) for p in res.peaks]})
        files.append(str(name))
    if res.gate_points:
        files += write_gate_scan(res.gate_points, res.gate_fit, prefix)
    if res.summary:
        name = Path(f"{prefix}_summary.json")
        _dump_json(name, res.summary)
        files.append(str(name))
    manifest = Path(f"{prefix}_manifest.json")
    _dump_json(manifest, {"tool": "ionspec", "version": __version__, "config": cfg,
                          "files": [Path(f).name for f in files]})
    files.append(str(manifest))
    return files


def _load(args) -> dict:
    if args.preset:
        return loads(preset_text(args.preset))
    return load(args.config)


def cmd_run(args) -> int:
    cfg = _load(args)
    if args.threads:
        cfg["threads"] = args.threads
    out = Path(args.out or cfg["output"]["dir"])
    files = write_outputs(run_experiment(cfg), out)
    for f in files:
        print(f)
    return EXIT_OK


def cmd_converge(args) -> int:
    cfg = _load(args)
    report = convergence_report(cfg)
    for c in report.checks:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.value:.3e} (limit {c.threshold:.3e}) {c.detail}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        _dump_json(out / f"{cfg['output']['prefix']}_convergence.json", report.to_dict())
    return EXIT_OK if report.passed else EXIT_FAILURE


def cmd_presets(args) -> int:
    if args.action == "list":
        for name in preset_names():
            print(name)
    else:
        print(preset_text(args.name), end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ionspec", description="Nonlinear spectroscopy of trapped-ion chains")
    p.add_argument("--version", action="version", version=f"ionspec {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def source(sp):
        g = sp.add_mutually_exclusive_group(required=True)
        g.add_argument("--config", help="path to a JSON experiment config")
        g.add_argument("--preset", help="name of a bundled preset")

    run = sub.add_parser("run", help="run an experiment and write its outputs")
    source(run)
    run.add_argument("--out", help="output directory (overrides output.dir)")
    run.add_argument("--threads", type=int, help="worker cap for grid evaluation")
    run.set_defaults(func=cmd_run)

    conv = sub.add_parser("converge", help="cap / amplitude / grid convergence report")
    source(conv)
    conv.add_argument("--out", help="also write the report as JSON here")
    conv.set_defaults(func=cmd_converge)

    pre = sub.add_parser("presets", help="list or show bundled presets")
    pre.add_argument("action", choices=["list", "show"])
    pre.add_argument("name", nargs="?")
    pre.set_defaults(func=cmd_presets)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "presets" and args.action == "show" and not args.name:
        print("presets show needs a name", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ResourceLimitError, ArithmeticError, np.linalg.LinAlgError, RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
