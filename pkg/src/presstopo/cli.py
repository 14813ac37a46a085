"""Command-line interface.

    presstopo run <arch|piston|chamber|custom> [--nelx N --nely N --volfrac F
        --penal F --rmin F --etaf F --betaf F --lst 0|1 --maxit N --out DIR
        --snapshot-every K --format pgm|pgm-ascii --spec FILE]

``custom`` reads a JSON problem file (see :mod:`presstopo.problems`); flags
override the values in the file.  Outputs written to ``--out``: the
convergence log ``history.csv``, the final density ``density_final.pgm``,
optional ``density_NNNN.pgm`` snapshots and ``problem.json``, the resolved
problem in the custom-config format.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .driver import OptimizationResult, optimize
from .output import IMAGE_FORMATS, write_density_image, write_history_csv
from .problems import PROBLEMS, ProblemSpec, build_custom, make_problem, spec_to_config

COMMANDS = PROBLEMS + ("custom",)
OVERRIDES = {
    "nelx": int, "nely": int, "volfrac": float, "penal": float, "rmin": float,
    "etaf": float, "betaf": float, "lst": int, "maxit": int,
}


@dataclass(frozen=True)
class RunConfig:
    problem: str
    out: Path = Path("out")
    snapshot_every: int = 0
    image_format: str = "pgm"
    spec_path: Path | None = None
    overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.problem not in COMMANDS:
            raise ValueError(f"unknown problem {self.problem!r}; available: {', '.join(COMMANDS)}")
        if self.snapshot_every < 0:
            raise ValueError("--snapshot-every must be >= 0")
        if self.image_format not in IMAGE_FORMATS:
            raise ValueError(f"unknown image format {self.image_format!r}")
        if self.problem == "custom" and self.spec_path is None:
            raise ValueError("'custom' needs --spec FILE")
        if self.problem != "custom" and self.spec_path is not None:
            raise ValueError("--spec is only used with 'custom'")
        for key, value in self.overrides.items():
            kind = OVERRIDES.get(key)
            if kind is None or isinstance(value, bool) or not isinstance(value, kind):
                raise ValueError(f"invalid override {key}={value!r}")
        if self.overrides.get("lst", 0) not in (0, 1):
            raise ValueError("--lst must be 0 or 1")

    def build_spec(self) -> ProblemSpec:
        if self.problem == "custom":
            config = load_config(self.spec_path)
            config.update(self.overrides)
            return build_custom(config)
        return make_problem(self.problem, **self.overrides)


def load_config(path) -> dict:
    with open(path) as fh:
        try:
            config = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(config, dict):
        raise ValueError(f"{path}: top level must be an object")
    return config


def run(config: RunConfig, log=None) -> OptimizationResult:
    """Build the problem, optimize and write all outputs; the CLI is a thin wrapper."""
    spec = config.build_spec()
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "problem.json").write_text(json.dumps(spec_to_config(spec)))
    ext = "pgm"

    def on_iteration(it, obj, mean, change, rho):
        if log is not None:
            print(f"It.:{it:5d} Obj.:{obj:11.4f} Vol.:{mean:7.3f} ch.:{change:7.3f}", file=log)
        if config.snapshot_every and it % config.snapshot_every == 0:
            write_density_image(rho, out / f"density_{it:04d}.{ext}", config.image_format)

    result = optimize(spec, on_iteration)
    write_density_image(result.rho_filt, out / f"density_final.{ext}", config.image_format)
    write_history_csv(result, out / "history.csv")
    return result


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="presstopo", description="Topology optimization under fluidic pressure loads.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("run", help="run a benchmark or a custom problem")
    p.add_argument("problem", help=f"one of: {', '.join(COMMANDS)}")
    for key, kind in OVERRIDES.items():
        p.add_argument(f"--{key}", type=kind, default=None)
    p.add_argument("--out", type=Path, default=Path("out"), help="output directory (default: out)")
    p.add_argument("--snapshot-every", type=int, default=0, metavar="K",
                   help="write a density image every K iterations (0: final only)")
    p.add_argument("--format", dest="image_format", choices=IMAGE_FORMATS, default="pgm")
    p.add_argument("--spec", type=Path, default=None, help="JSON problem file for 'custom'")
    p.add_argument("--quiet", action="store_true", help="do not print per-iteration progress")
    return parser


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    overrides = {k: getattr(args, k) for k in OVERRIDES if getattr(args, k) is not None}
    try:
        config = RunConfig(
            problem=args.problem, out=args.out, snapshot_every=args.snapshot_every,
            image_format=args.image_format, spec_path=args.spec, overrides=overrides,
        )
    except ValueError as exc:
        print(f"presstopo: error: {exc}", file=sys.stderr)
        return 2
    try:
        result = run(config, log=None if args.quiet else sys.stdout)
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"presstopo: error: {exc}", file=sys.stderr)
        return 1
    print(f"finished after {result.iterations} iterations ({result.reason}); outputs in {config.out}")
    return 0


def main() -> None:
    sys.exit(run_cli())
