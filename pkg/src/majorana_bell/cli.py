"""Command-line interface.

::

    majorana-bell presets
    majorana-bell run fig3ab --out results --svg
    majorana-bell run my_config.yaml --dt 0.005 --seed 7
    majorana-bell sweep fig2a --param params.epsilon --values 0:10:11
    majorana-bell sweep fig6 --svg
    majorana-bell validate my_config.yaml

Exit status is 0 on success, 2 for configuration problems and 3 for
failures in a later stage; the stage is named in the message.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from .config import ConfigError, ExperimentConfig, load_config
from .presets import EIGEN_PRESETS, PRESETS, preset, preset_names
from .report import emit_csv, emit_eigen_svg, emit_svg, emit_table, write_json
from .runner import StageError, eigen_sweep, run, sweep
from .schemes import build_scheme

log = logging.getLogger("majorana_bell")

EXIT_CONFIG = 2
EXIT_STAGE = 3


def resolve(target: str) -> ExperimentConfig:
    """Preset name or path to a YAML/JSON configuration."""
    if target in PRESETS or target in EIGEN_PRESETS:
        return preset(target)
    path = Path(target)
    if path.exists():
        return load_config(path).effective()
    raise ConfigError(f"{target!r} is neither a preset ({', '.join(preset_names())}) nor a file")


def parse_values(text: str) -> list[float]:
    """``"a:b:n"`` for ``n`` evenly spaced values, or a comma list."""
    text = text.strip()
    if not text:
        return []
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError("range values must look like start:stop:count")
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
        return [float(x) for x in np.linspace(a, b, n)]
    return [float(x) for x in text.split(",")]


def _stride(cfg: ExperimentConfig) -> int:
    if cfg.sample_interval is None:
        return 1
    return max(1, round(float(cfg.sample_interval) / float(cfg.grid["dt"])))


def _output_dir(path: str) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise StageError("output", str(exc)) from exc
    return out


def cmd_presets(args: argparse.Namespace) -> int:
    for name in preset_names():
        cfg = preset(name)
        print(f"{name:8s} {cfg.scheme:14s} {cfg.description}")
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    cfg = resolve(args.target)
    if args.dt is not None:
        cfg.grid["dt"] = args.dt
    cfg.validate()
    sys.stdout.write(cfg.dump())
    print(f"# ok: {cfg.name}", file=sys.stderr)
    return 0


def _run_eigen(cfg: ExperimentConfig, out: Path, values: list[float] | None, parameter: str | None, svg: bool) -> int:
    sw = cfg.sweep or {}
    parameter = parameter or sw.get("parameter", "params.epsilon")
    values = values if values is not None else [float(v) for v in sw.get("values", [])]
    rows = eigen_sweep(cfg.scheme, cfg.params, parameter, values, int(sw.get("levels", 2)))
    table = emit_table(rows, out / f"{cfg.name}.eigen.csv")
    (out / f"{cfg.name}.config.yaml").write_text(cfg.dump(), encoding="utf-8")
    print(f"wrote {table}")
    if svg:
        labels = build_scheme(cfg.scheme, cfg.scheme_params()).labels
        print(f"wrote {emit_eigen_svg(rows, out / f'{cfg.name}.eigen.svg', labels, cfg.description)}")
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    cfg = resolve(args.target)
    out = _output_dir(args.out)
    if cfg.sweep is not None and cfg.sweep.get("mode") == "eigen":
        return _run_eigen(cfg, out, None, None, args.svg)
    result = run(cfg, seed=args.seed, dt=args.dt)
    eff = result.config
    try:
        csv_path = emit_csv(result.trajectory, out / f"{eff.name}.csv", _stride(eff))
        (out / f"{eff.name}.config.yaml").write_text(eff.dump(), encoding="utf-8")
        write_json(result.summary, out / f"{eff.name}.summary.json")
        if args.svg:
            emit_svg(result.trajectory, out / f"{eff.name}.svg", title=eff.description)
    except OSError as exc:
        raise StageError("output", str(exc)) from exc
    s = result.summary
    fp = "never" if s.first_passage is None else f"{s.first_passage:.4g}"
    print(f"{eff.name}: final target population {s.final_target_population:.6f}, "
          f"first passage to {eff.threshold:g} at t = {fp}")
    for b in s.branches:
        fid = "n/a" if b.fidelity is None else f"{b.fidelity:.6f}"
        freq = "" if b.frequency is None else f", sampled frequency {b.frequency:.4f}"
        print(f"  parity {b.outcome:+d}: probability {b.probability:.6f}{freq}, fidelity to {b.target} {fid}")
    print(f"wrote {csv_path}")
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = resolve(args.target)
    out = _output_dir(args.out)
    values = parse_values(args.values) if args.values is not None else None
    if cfg.sweep is not None and cfg.sweep.get("mode") == "eigen":
        return _run_eigen(cfg, out, values, args.param, args.svg)
    if args.param is None or values is None:
        raise ConfigError("sweep needs --param and --values for a dynamics configuration")
    if args.dt is not None:
        cfg.grid["dt"] = args.dt
    rows = sweep(cfg, args.param, values)
    path = emit_table(rows, out / f"{cfg.name}.sweep.csv")
    print(f"wrote {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="majorana-bell", description="Bell-state preparation in Majorana/quantum-dot models.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp: argparse.ArgumentParser) -> None:
        sp.add_argument("--out", default="out", help="output directory (default: out)")
        sp.add_argument("--seed", type=int, default=None, help="seed for sampled measurement shots")
        sp.add_argument("--dt", type=float, default=None, help="override the time step")
        sp.add_argument("--svg", action="store_true", help="also write an SVG plot")

    sp = sub.add_parser("presets", help="list available presets")
    sp.set_defaults(func=cmd_presets)

    sp = sub.add_parser("run", help="run a preset or configuration file")
    sp.add_argument("target")
    common(sp)
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("sweep", help="sweep a scalar configuration entry")
    sp.add_argument("target")
    sp.add_argument("--param", default=None, help="dotted path, e.g. params.epsilon")
    sp.add_argument("--values", default=None, help="start:stop:count or a comma list")
    common(sp)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("validate", help="check a configuration and print its effective form")
    sp.add_argument("target")
    sp.add_argument("--dt", type=float, default=None)
    sp.set_defaults(func=cmd_validate)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return int(args.func(args))
    except ConfigError as exc:
        print(f"error [config]: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except StageError as exc:
        print(f"error [{exc.stage}]: {exc}", file=sys.stderr)
        return EXIT_CONFIG if exc.stage == "config" else EXIT_STAGE


if __name__ == "__main__":
    sys.exit(main())
