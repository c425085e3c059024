"""Command-line front end.

    choquard solve --dim 3 --radius 5 --out gs.json
    choquard sweep --dim 3 --radii 2,4,8,16,32
    choquard oracle3d --radius 5 --grid 41
    choquard verify --suite kernel

Exit codes: 0 success, 1 numeric failure, 2 usage or validation error.
Errors are reported on stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import dataclass, field, replace
from typing import Optional

from .convergence import default_radii, records_to_csv, records_to_json, run_sweep, validate_radii
from .errors import ChoquardError, DomainError
from .kernel import BallSpec, Dimension

EXIT_OK, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2

log = logging.getLogger("choquard")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


@dataclass
class RunConfig:
    command: str
    dim: int = 3
    radius: float = 5.0
    tol_ode: Optional[float] = None
    radii: Optional[tuple] = None
    grid: int = 41
    seed: int = 42
    asymmetric: bool = False
    suite: str = "all"
    out: Optional[str] = None
    extra: dict = field(default_factory=dict)

    def validate(self) -> "RunConfig":
        Dimension(self.dim)
        if not self.radius > 0:
            raise DomainError("radius must be positive")
        if self.tol_ode is not None and not 0 < self.tol_ode < 1:
            raise DomainError("--tol-ode must lie in (0, 1)")
        if self.command == "sweep":
            radii = default_radii(self.dim) if self.radii is None else self.radii
            self.radii = tuple(validate_radii(radii))
        if self.command == "oracle3d":
            if self.dim != 3:
                raise DomainError("the grid oracle is three-dimensional")
            if math.isinf(self.radius):
                raise DomainError("the grid oracle needs a finite radius")
            if self.grid < 33 or self.grid % 2 == 0:
                raise DomainError("--grid must be odd and at least 33")
        return self


def _radius(text: str) -> float:
    if text.strip().lower() in ("inf", "infinity"):
        return math.inf
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a radius: {text!r}")
    return value


def _radii(text: str):
    parts = [p for p in text.split(",") if p.strip()]
    try:
        return tuple(float(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad radii list: {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="choquard", description="Radial Choquard ground states on balls.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="ground state on B_R or whole space")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--radius", type=_radius, required=True, help="positive number or 'inf'")
    p.add_argument("--tol-ode", type=float, default=None)
    p.add_argument("--method", choices=("auto", "shooting", "collocation"), default="auto")
    p.add_argument("--out", default="ground_state.json",
                   help="GroundState JSON path; the profile CSV goes next to it")

    p = sub.add_parser("sweep", help="convergence sweep over radii")
    p.add_argument("--dim", type=int, default=3)
    p.add_argument("--radii", type=_radii, default=None,
                   help="comma-separated radii (default 2,4,8,16,32; 2,4,8,16 for N >= 5)")
    p.add_argument("--out", default=None, help="CSV path (default: stdout only)")
    p.add_argument("--json", default=None, help="also write the JSON variant here")
    p.add_argument("--threads", type=int, default=None)

    p = sub.add_parser("oracle3d", help="3D finite-difference ground state (N=3)")
    p.add_argument("--radius", type=_radius, default=5.0)
    p.add_argument("--grid", type=int, default=41)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--asymmetric-seed", action="store_true")
    p.add_argument("--theta", type=float, default=0.8)
    p.add_argument("--out", default="oracle3d", help="output directory")

    p = sub.add_parser("verify", help="run invariant suites")
    p.add_argument("--suite", choices=("all", "kernel", "talenti", "uniqueness", "spectral"),
                   default="all")
    return parser


def _config(args) -> RunConfig:
    cmd = args.command
    cfg = RunConfig(command=cmd)
    if cmd == "solve":
        cfg = replace(cfg, dim=args.dim, radius=args.radius, tol_ode=args.tol_ode, out=args.out,
                      extra={"method": args.method})
    elif cmd == "sweep":
        cfg = replace(cfg, dim=args.dim, radii=args.radii, out=args.out,
                      extra={"json": args.json, "threads": args.threads})
    elif cmd == "oracle3d":
        cfg = replace(cfg, radius=args.radius, grid=args.grid, seed=args.seed,
                      asymmetric=args.asymmetric_seed, out=args.out,
                      extra={"theta": args.theta})
    else:
        cfg = replace(cfg, suite=args.suite)
    return cfg.validate()


def _fail(kind: str, message: str, code: int, **extra) -> int:
    payload = {"error": kind, "message": message, "exit_code": code}
    payload.update(extra)
    sys.stderr.write(json.dumps(payload, default=str) + "\n")
    return code


def cmd_solve(cfg: RunConfig) -> int:
    from .shooting import DEFAULT_TOL, solve_ball

    tol = DEFAULT_TOL if cfg.tol_ode is None else replace(DEFAULT_TOL, ode=cfg.tol_ode)
    ball = BallSpec(Dimension(cfg.dim), cfg.radius)
    gs = solve_ball(ball, tol, method=cfg.extra.get("method", "auto"))
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(gs.to_json())
        stem = cfg.out[:-5] if cfg.out.endswith(".json") else cfg.out
        gs.profile.to_csv(stem + ".csv")
    print(f"lambda={gs.lam:.17g}")
    print(f"c={gs.energy:.17g}")
    print(f"amplitude={gs.amplitude:.17g}")
    return EXIT_OK


def cmd_sweep(cfg: RunConfig) -> int:
    records = run_sweep(Dimension(cfg.dim), cfg.radii, threads=cfg.extra.get("threads"))
    text = records_to_csv(records, cfg.out)
    if cfg.extra.get("json"):
        with open(cfg.extra["json"], "w") as fh:
            fh.write(records_to_json(records))
    sys.stdout.write(text)
    return EXIT_OK if any(r.ok for r in records) else EXIT_NUMERIC


def cmd_oracle(cfg: RunConfig) -> int:
    from .grid3d import ground_state_iterate, radial_deviation, shell_profile_csv

    ball = BallSpec(Dimension(3), cfg.radius)
    field_ = ground_state_iterate(ball, cfg.grid, seed=cfg.seed, asymmetric=cfg.asymmetric,
                                  theta=cfg.extra.get("theta", 0.8))
    os.makedirs(cfg.out, exist_ok=True)
    field_.u.save(os.path.join(cfg.out, "u.bin"))
    field_.w.save(os.path.join(cfg.out, "w.bin"))
    shell_profile_csv(field_.u, os.path.join(cfg.out, "shell_profile.csv"))
    summary = {
        "c_R_grid": field_.energy,
        "radial_deviation": radial_deviation(field_.u),
        "iterations": field_.iteration,
        "residual": field_.residual,
        "R": cfg.radius,
        "n_grid": cfg.grid,
        "seed": "asymmetric" if cfg.asymmetric else cfg.seed,
    }
    with open(os.path.join(cfg.out, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    from .verify import SUITES, run_suites

    names = list(SUITES) if cfg.suite == "all" else [cfg.suite]
    checks = run_suites(names)
    for c in checks:
        print(c.line())
    return EXIT_OK if all(c.passed for c in checks) else EXIT_NUMERIC


COMMANDS = {"solve": cmd_solve, "sweep": cmd_sweep, "oracle3d": cmd_oracle, "verify": cmd_verify}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        return _fail("usage", str(exc), EXIT_USAGE)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _config(args)
    except (DomainError, ValueError) as exc:
        return _fail("validation", str(exc), EXIT_USAGE)
    try:
        return COMMANDS[cfg.command](cfg)
    except DomainError as exc:
        return _fail("validation", str(exc), EXIT_USAGE)
    except ChoquardError as exc:
        return _fail(type(exc).__name__, str(exc), EXIT_NUMERIC,
                     diagnostics=getattr(exc, "diagnostics", None))
    except OSError as exc:
        return _fail("io", str(exc), EXIT_NUMERIC)


if __name__ == "__main__":
    sys.exit(main())
