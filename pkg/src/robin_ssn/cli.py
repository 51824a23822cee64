"""Command line driver: run the semismooth Newton experiment and write the
convergence table, a CSV history, optional diagnostics and VTK fields."""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .diagnostics import default_eps_sc, optimality_report
from .mesh import build_unit_cube_mesh
from .pde import NonConvergence, discretize
from .problems import X1_PLUS_X2SQ, manufactured, paper_example
from .ssn import IterationRecord, SsnConfig, ssn_solve
from .vtk import write_boundary_vtk, write_volume_vtk

log = logging.getLogger("robin_ssn")

PROBLEMS = ("paper-example", "manufactured")
CSV_COLUMNS = [f.name for f in dataclasses.fields(IterationRecord)]


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    problem: str = "paper-example"
    n: int = 16
    nu: Optional[float] = None
    alpha: Optional[float] = None
    beta: Optional[float] = None
    u0: Union[float, str] = 0.0  # constant value or path of a file with nodal values
    ssn: SsnConfig = field(default_factory=SsnConfig)
    out: str = "results"
    export_vtk: bool = False
    diagnostics: bool = False
    tau: float = 1e-6
    eps_sc: Optional[float] = None

    def build_problem(self):
        if self.problem == "paper-example":
            base = paper_example()
        elif self.problem == "manufactured":
            base = manufactured(X1_PLUS_X2SQ, 1.0).problem
        else:
            raise ConfigError(f"problem: unknown problem {self.problem!r}, choose from {PROBLEMS}")
        try:
            return base.with_parameters(self.nu, self.alpha, self.beta)
        except ValueError as exc:
            raise ConfigError(f"problem parameters: {exc}") from None

    def validate(self):
        if isinstance(self.n, bool) or not isinstance(self.n, int) or self.n < 1:
            raise ConfigError(f"n: mesh level must be a positive integer, got {self.n!r}")
        if not (isinstance(self.tau, (int, float)) and self.tau > 0):
            raise ConfigError("tau: must be positive")
        if self.eps_sc is not None and not self.eps_sc >= 0:
            raise ConfigError("eps_sc: must be nonnegative")
        if not isinstance(self.u0, (int, float, str)) or isinstance(self.u0, bool):
            raise ConfigError("u0: expected a number or a file path")
        return self.build_problem()


_SSN_KEYS = {f.name for f in dataclasses.fields(SsnConfig)}
_TOP_KEYS = {f.name for f in dataclasses.fields(RunConfig)}


def parse_config(text: str) -> RunConfig:
    """Parse a JSON object with RunConfig field names; unknown keys are errors."""
    try:
        data = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    kwargs = dict(data)
    ssn = kwargs.pop("ssn", {}) or {}
    if not isinstance(ssn, dict):
        raise ConfigError("ssn: must be an object")
    bad = set(ssn) - _SSN_KEYS
    if bad:
        raise ConfigError(f"unknown ssn key(s): {', '.join(sorted(bad))}")
    try:
        kwargs["ssn"] = SsnConfig(**ssn)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"ssn: {exc}") from None
    cfg = RunConfig(**kwargs)
    cfg.validate()
    return cfg


def format_table(history) -> str:
    lines = [f"{'j':>3}  {'J(u_j)':>24}  {'delta_j':>8}  {'#Newton':>7}  {'#CG':>4}"]
    for r in history:
        last = math.isnan(r.delta)
        delta = "" if last else f"{r.delta:.1e}"
        cg = "" if last else str(r.cg)
        lines.append(f"{r.j:>3}  {r.J:>24.16e}  {delta:>8}  {r.newton:>7}  {cg:>4}")
    return "\n".join(lines) + "\n"


def write_history_csv(path, history):
    with open(path, "w", newline="") as f:
        wr = csv.writer(f, lineterminator="\n")
        wr.writerow(CSV_COLUMNS)
        for r in history:
            row = []
            for name in CSV_COLUMNS:
                v = getattr(r, name)
                row.append(f"{v:.17g}" if isinstance(v, float) else str(v))
            wr.writerow(row)


def read_history_csv(path):
    types = {f.name: f.type for f in dataclasses.fields(IterationRecord)}
    out = []
    with open(path, newline="") as f:
        for row in csv.DictReader(f):
            out.append(IterationRecord(**{
                k: (int(v) if types[k] in (int, "int") else float(v)) for k, v in row.items()
            }))
    return out


def _initial_control(cfg: RunConfig, mesh):
    if isinstance(cfg.u0, str):
        try:
            u0 = np.loadtxt(cfg.u0, dtype=float).ravel()
        except OSError as exc:
            raise ConfigError(f"u0: cannot read {cfg.u0}: {exc}") from None
        if u0.shape != (mesh.n_boundary,):
            raise ConfigError(f"u0: file has {u0.size} values, mesh has {mesh.n_boundary} boundary nodes")
        return u0
    return np.full(mesh.n_boundary, float(cfg.u0))


def run_experiment(cfg: RunConfig) -> int:
    """Returns 0 on success, 1 if the solver did not converge, 2 on bad config."""
    try:
        problem = cfg.validate()
        mesh = build_unit_cube_mesh(cfg.n)
        u0 = _initial_control(cfg, mesh)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return 2

    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    disc = discretize(problem, mesh)
    status = 0
    try:
        result = ssn_solve(disc, u0, cfg.ssn)
    except NonConvergence as exc:
        log.error("%s", exc)
        status = 1
        result = exc.history
        if result is None:
            return status

    table = format_table(result.history)
    (out / "table.txt").write_text(table)
    write_history_csv(out / "history.csv", result.history)
    sys.stdout.write(table)

    pt = result.point
    if cfg.diagnostics and pt is not None:
        eps = cfg.eps_sc if cfg.eps_sc is not None else default_eps_sc(problem.nu, problem.alpha, problem.beta)
        rep = optimality_report(pt, eps_sc=eps, tau=cfg.tau)
        (out / "report.json").write_text(json.dumps(rep.to_dict(), indent=2) + "\n")
    if cfg.export_vtk and pt is not None:
        write_volume_vtk(out / "volume.vtk", mesh, {"y": pt.y, "phi": pt.phi})
        write_boundary_vtk(out / "control.vtk", mesh, {"u": result.u, "y": pt.y_b, "phi": pt.phi_b})
    return status


def build_parser():
    ap = argparse.ArgumentParser(prog="robin-ssn", description=__doc__)
    ap.add_argument("--config", help="JSON config file")
    ap.add_argument("--problem", choices=PROBLEMS)
    ap.add_argument("--n", type=int, help="mesh level (cells per axis)")
    ap.add_argument("--u0", type=float, help="constant initial control")
    ap.add_argument("--tol", type=float, help="stopping tolerance on the relative step")
    ap.add_argument("--out", help="output directory")
    ap.add_argument("--export-vtk", action="store_true")
    ap.add_argument("--diagnostics", action="store_true")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        text = Path(args.config).read_text(encoding="utf-8") if args.config else ""
        cfg = parse_config(text)
        if args.problem:
            cfg.problem = args.problem
        if args.n is not None:
            cfg.n = args.n
        if args.u0 is not None:
            cfg.u0 = args.u0
        if args.tol is not None:
            cfg.ssn = dataclasses.replace(cfg.ssn, tol_delta=args.tol)
        if args.out:
            cfg.out = args.out
        cfg.export_vtk = cfg.export_vtk or args.export_vtk
        cfg.diagnostics = cfg.diagnostics or args.diagnostics
    except (OSError, ConfigError, ValueError) as exc:
        log.error("configuration error: %s", exc)
        return 2
    return run_experiment(cfg)


if __name__ == "__main__":
    sys.exit(main())
