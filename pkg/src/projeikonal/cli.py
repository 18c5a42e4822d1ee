"""Command-line driver.

Every subcommand reads a JSON config (``--config``), lets ``--h``,
``--seed``, ``--out`` and ``--threads`` override it, computes everything in
memory and only then writes its outputs, each through a temporary file and a
rename. A one-line JSON summary goes to standard output.

Exit status: 0 on success, 1 on computation errors, 2 on usage or config
errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .copolymer import (
    energy_suite,
    pattern_from_json,
    perimeter,
    recovery_pattern,
)
from .errors import ConfigError, EikonalError
from .fields import exact_solution, residual
from .geometry import TubularDomain, domain_from_json, rasterize
from .linefield import ProjectionField
from .render import RenderSpec, render
from .variational import MinimizeParams, minimize, tubularity_test

log = logging.getLogger(__name__)

COMMANDS = ("domain", "exact", "minimize", "tubularity", "stripes", "energy", "render")
CONFIG_KEYS = {"domain", "h", "seed", "out", "threads", "minimize", "h_ladder", "pattern",
               "eps", "transport", "render", "input", "recovery"}
TRANSPORT_KEYS = {"method", "h", "cells", "sector"}


@dataclass
class RunConfig:
    command: str
    out: Path = Path(".")
    h: float | None = None
    seed: int | None = None
    threads: int | None = None
    domain: dict | None = None
    minimize: dict = field(default_factory=dict)
    h_ladder: list | None = None
    pattern: dict | None = None
    eps: object = None
    transport: dict = field(default_factory=dict)
    render: dict = field(default_factory=dict)
    input: str | None = None
    recovery: str | None = None

    @classmethod
    def from_sources(cls, command: str, data: dict, args) -> "RunConfig":
        unknown = set(data) - CONFIG_KEYS
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(command=command, **{k: v for k, v in data.items()})
        cfg.out = Path(args.out if args.out is not None else data.get("out", "."))
        if args.h is not None:
            cfg.h = args.h
        if args.seed is not None:
            cfg.seed = args.seed
        if args.threads is not None:
            cfg.threads = args.threads
        cfg.validate()
        return cfg

    def require(self, *names):
        for name in names:
            if getattr(self, name) is None:
                raise ConfigError(f"'{self.command}' needs '{name}' in the config")

    def validate(self):
        if self.h is not None and not (isinstance(self.h, (int, float)) and self.h > 0):
            raise ConfigError("h must be a positive number")
        if self.seed is not None and (not isinstance(self.seed, int) or self.seed < 0):
            raise ConfigError("seed must be a non-negative integer")
        if self.threads is not None and (not isinstance(self.threads, int) or self.threads < 1):
            raise ConfigError("threads must be a positive integer")
        bad = set(self.transport) - TRANSPORT_KEYS
        if bad:
            raise ConfigError(f"unknown transport keys: {sorted(bad)}")
        bad = set(self.minimize) - set(MinimizeParams.__dataclass_fields__)
        if bad:
            raise ConfigError(f"unknown minimize keys: {sorted(bad)}")
        bad = set(self.render) - set(RenderSpec.__dataclass_fields__)
        if bad:
            raise ConfigError(f"unknown render keys: {sorted(bad)}")
        if self.out.exists() and not self.out.is_dir():
            raise ConfigError(f"output path {self.out} is not a directory")
        if self.input is not None and not Path(self.input).is_file():
            raise ConfigError(f"input file {self.input} does not exist")
        need = {"domain": ("domain", "h"), "exact": ("domain", "h"), "minimize": ("domain", "h"),
                "tubularity": ("domain", "h_ladder"), "stripes": ("pattern",),
                "energy": ("eps",), "render": ("input",)}
        self.require(*need[self.command])
        if self.command == "energy" and self.pattern is None:
            raise ConfigError("'energy' needs a 'pattern' in the config")

    def params(self) -> MinimizeParams:
        opts = dict(self.minimize)
        if self.seed is not None:
            opts["seed"] = self.seed
        try:
            return MinimizeParams(**opts)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    def make_domain(self):
        try:
            return domain_from_json(self.domain)
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"bad domain spec: {exc}") from exc


# --------------------------------------------------------------------------
# outputs


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True) + "\n"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(v)) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def write_outputs(out: Path, files: dict) -> list:
    """Write ``{name: text}`` atomically; nothing is renamed until all
    temporary files are complete."""
    out.mkdir(parents=True, exist_ok=True)
    umask = os.umask(0)
    os.umask(umask)
    staged = []
    try:
        for name, text in files.items():
            fd, tmp = tempfile.mkstemp(dir=out, prefix=f".{name}.", suffix=".tmp")
            staged.append((tmp, out / name))
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            os.chmod(tmp, 0o666 & ~umask)
        for tmp, dest in staged:
            os.replace(tmp, dest)
    finally:
        for tmp, _ in staged:
            if os.path.exists(tmp):
                os.unlink(tmp)
    return [str(dest) for _, dest in staged]


def _field_doc(field: ProjectionField, domain_spec) -> str:
    return _dumps({**field.to_json(), "domain": domain_spec})


# --------------------------------------------------------------------------
# commands


def cmd_domain(cfg: RunConfig):
    grid = rasterize(cfg.make_domain(), cfg.h)
    doc = {**grid.to_json(), "domain": cfg.domain}
    summary = {"n_interior": grid.n_interior, "h": grid.h, "area": grid.area,
               "boundary_length": float(grid.boundary_weights.sum())}
    return {"grid.json": _dumps(doc)}, summary


def cmd_exact(cfg: RunConfig):
    tube = cfg.make_domain()
    if not isinstance(tube, TubularDomain):
        raise ConfigError("'exact' needs a tubular domain")
    f = exact_solution(tube, rasterize(tube, cfg.h))
    rep = residual(f).to_json()
    return {"field.json": _field_doc(f, cfg.domain), "residual.json": _dumps(rep)}, rep


def cmd_minimize(cfg: RunConfig):
    params = cfg.params()
    rep = minimize(rasterize(cfg.make_domain(), cfg.h), params)
    trace = _csv(["iteration", "objective"], [(i, v) for i, v in enumerate(rep.objective_trace)])
    summary = {"objective": rep.objective, "residual_l2": rep.residual_l2,
               "iterations": rep.iterations, "converged": rep.converged}
    return {"field.json": _field_doc(rep.field, cfg.domain), "report.json": _dumps(rep.to_json()),
            "trace.csv": trace}, summary


def cmd_tubularity(cfg: RunConfig):
    rep = tubularity_test(cfg.make_domain(), cfg.h_ladder, cfg.params())
    doc = {**rep.to_json(), "params": asdict(cfg.params())}
    return {"tubularity.json": _dumps(doc)}, {"verdict": rep.verdict, "values": rep.values,
                                               "ratios": rep.ratios}


def _pattern(cfg: RunConfig, eps=None):
    try:
        if cfg.recovery is not None:
            tube = domain_from_json(cfg.pattern["tube"])
            return recovery_pattern(tube, eps, cfg.recovery)
        return pattern_from_json(cfg.pattern)
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"bad pattern spec: {exc}") from exc


def cmd_stripes(cfg: RunConfig):
    p = _pattern(cfg)
    doc = {**p.to_json(), "mass_fraction": p.mass_fraction, "perimeter": perimeter(p),
           "admissible": p.admissible}
    return {"pattern.json": _dumps(doc)}, {"bands": len(p.bands), "mass_fraction": p.mass_fraction,
                                           "perimeter": doc["perimeter"]}


def cmd_energy(cfg: RunConfig):
    eps_values = cfg.eps if isinstance(cfg.eps, list) else [cfg.eps]
    opts = dict(cfg.transport)
    method = opts.pop("method", "exact-flow")
    if method != "exact-flow":
        opts = {}
    rows = []
    for e in eps_values:
        if not isinstance(e, (int, float)) or e <= 0:
            raise ConfigError("eps values must be positive numbers")
        rows.append(energy_suite(_pattern(cfg, e), float(e), method, **opts).to_json())
    table = _csv(["eps", "F", "G", "H", "perimeter", "transport"],
                 [(r["eps"], r["F"], r["G"], r["H"], r["perimeter"], r["transport"]) for r in rows])
    summary = {"eps": [r["eps"] for r in rows], "G": [r["G"] for r in rows]}
    return {"energy.json": _dumps(rows), "energy.csv": table}, summary


def cmd_render(cfg: RunConfig):
    try:
        spec = RenderSpec(**cfg.render)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
    data = json.loads(Path(cfg.input).read_text())
    if "q" in data:
        obj = ProjectionField.from_json(data)
    elif "tube" in data:
        obj = pattern_from_json({"tube": data["tube"], "interfaces": data["interfaces"]})
    else:
        raise ConfigError("input is neither a field nor a pattern file")
    svg = render(obj, spec)
    return {"figure.svg": svg}, {"bytes": len(svg.encode())}


HANDLERS = {"domain": cmd_domain, "exact": cmd_exact, "minimize": cmd_minimize,
            "tubularity": cmd_tubularity, "stripes": cmd_stripes, "energy": cmd_energy,
            "render": cmd_render}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="projeikonal",
                                     description="Projection-valued eikonal equation toolkit.")
    sub = parser.add_subparsers(dest="command", metavar="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=HANDLERS[name].__name__.replace("cmd_", ""))
        p.add_argument("--config", type=Path, help="JSON config file")
        p.add_argument("--out", type=Path, help="output directory")
        p.add_argument("--seed", type=int)
        p.add_argument("--h", type=float, help="grid spacing")
        p.add_argument("--threads", type=int, help="cap on compute threads")
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        data = json.loads(args.config.read_text()) if args.config else {}
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        cfg = RunConfig.from_sources(args.command, data, args)
    except (OSError, json.JSONDecodeError, ConfigError, TypeError) as exc:
        print(f"projeikonal {args.command}: config error: {exc}", file=sys.stderr)
        return 2
    try:
        from threadpoolctl import threadpool_limits
        with threadpool_limits(limits=cfg.threads):
            files, summary = HANDLERS[cfg.command](cfg)
        written = write_outputs(cfg.out, files)
    except ConfigError as exc:
        print(f"projeikonal {cfg.command}: config error: {exc}", file=sys.stderr)
        return 2
    except (EikonalError, ValueError, OSError) as exc:
        print(f"projeikonal {cfg.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    print(json.dumps({"command": cfg.command, "status": "ok", "outputs": written, **summary},
                     sort_keys=True))
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
