"""
minlift command line.

    minlift catalog
    minlift check --map enneper --criterion hs
    minlift check --pair enneper,scherk-singly --criterion dilatation-equal
    minlift lift --map catenoid --format ply --out out/
    minlift lift --map-file my_map.json
    minlift sweep --from enneper --to scherk-singly --steps 6 --out out/

Every command prints a fixed-width table and writes the same result as JSON
under --out. Exit codes: 0 pass, 1 criterion failure, 2 usage error,
3 numeric or I/O error.
"""
import argparse
import json
import logging
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple

import numpy as np
import pandas as pd

from .analytic import DEFAULT_NODES
from .criteria import (BOUNDARY_POINTS, DEFAULT_N_R, DEFAULT_N_THETA, DEFAULT_TOLERANCE,
                       SYMMETRY_TOLERANCE, DiskGrid, check_css_univalence, check_hs,
                       check_injectivity_boundary, check_koepf, check_local_univalence,
                       check_rotational_symmetry, check_taylor, default_grid, dilatation_report,
                       scan_prime_ends, search_alpha)
from .errors import (DegenerateCurveError, DilatationMismatchError, DomainError, MeshIOError,
                     PoleError, UnknownNameError)
from .mappings import (CATALOG_NAMES, FAMILIES, HarmonicMap, catalog, family, family_for, family_of,
                       shear)
from .surface import FORMATS, atomic_write_text, build_mesh, export, mesh_filename
from .sweep import FamilySweep

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3

CRITERIA = ("local-univalence", "hs", "koepf", "taylor", "css", "dilatation-equal", "symmetry",
            "injectivity", "prime-ends")
CONVENTIONS = ("css", "difference")


@dataclass(frozen=True)
class RunConfig:
    command: str
    out: Path = Path("minlift-out")
    map_name: Optional[str] = None
    map_file: Optional[Path] = None
    pair: Optional[Tuple[str, str]] = None
    criterion: Optional[str] = None
    beta: float = math.pi / 2
    alpha: Optional[float] = None
    k: int = 1
    n_r: int = DEFAULT_N_R
    n_theta: int = DEFAULT_N_THETA
    r_max: Optional[float] = None
    nodes: int = DEFAULT_NODES
    tolerance: Optional[float] = None
    phi_convention: str = "css"
    radius: Optional[float] = None
    n_boundary: int = BOUNDARY_POINTS
    family: Optional[str] = None
    endpoint_a: Optional[str] = None
    endpoint_b: Optional[str] = None
    file_a: Optional[Path] = None
    file_b: Optional[Path] = None
    steps: int = 6
    fmt: str = "obj"
    samples: int = 50
    seed: int = 0
    threads: Optional[int] = None

    def __post_init__(self):
        if self.n_r < 1 or self.n_theta < 1:
            raise ValueError("--n-r and --n-theta must be at least 1")
        if self.r_max is not None and not 0.0 < self.r_max < 1.0:
            raise ValueError("--rmax must lie in (0, 1)")
        if self.nodes < 2:
            raise ValueError("--nodes must be at least 2")
        if self.tolerance is not None and self.tolerance < 0.0:
            raise ValueError("--tol must be non-negative")
        if self.k < 1:
            raise ValueError("--k must be at least 1")
        if self.n_boundary < 16:
            raise ValueError("--n-boundary must be at least 16")
        if self.steps < 2:
            raise ValueError("--steps must be at least 2")
        if self.samples < 0:
            raise ValueError("--samples must be non-negative")
        if self.threads is not None and self.threads < 1:
            raise ValueError("--threads must be at least 1")
        if self.fmt not in FORMATS:
            raise ValueError(f"--format must be one of {', '.join(FORMATS)}")
        if self.phi_convention not in CONVENTIONS:
            raise ValueError(f"--phi-convention must be one of {', '.join(CONVENTIONS)}")
        if self.command == "check":
            if self.criterion == "dilatation-equal" and self.pair is None:
                raise ValueError("dilatation-equal needs --pair A,B")
            if self.criterion != "dilatation-equal" and self.map_name is None and self.map_file is None:
                raise ValueError(f"{self.criterion} needs --map NAME or --map-file PATH")
        if self.command == "sweep" and self.family is None:
            start = self.endpoint_a or self.file_a
            end = self.endpoint_b or self.file_b
            if start is None or end is None:
                raise ValueError("sweep needs --family NAME or both ends, from --from/--from-file "
                                 "and --to/--to-file")
        if self.command == "sweep" and self.family is not None and (self.file_a or self.file_b):
            raise ValueError("--from-file and --to-file replace --family, not extend it")

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        fields = {name: value for name, value in vars(args).items()
                  if name in cls.__dataclass_fields__ and value is not None}
        return cls(**fields)

    def grid(self, map_r_max: float) -> DiskGrid:
        if self.r_max is None:
            return default_grid(map_r_max, self.n_r, self.n_theta)
        return DiskGrid(self.n_r, self.n_theta, self.r_max)

    def tolerance_or(self, default: float) -> float:
        return default if self.tolerance is None else self.tolerance


def _pair(text: str):
    names = tuple(part.strip() for part in text.split(","))
    if len(names) != 2 or not all(names):
        raise argparse.ArgumentTypeError(f"expected two names separated by a comma, got {text!r}")
    return names


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, help="directory for JSON reports and meshes (default: minlift-out)")
    common.add_argument("-v", "--verbose", action="store_true", help="log at DEBUG level")

    grid = argparse.ArgumentParser(add_help=False)
    grid.add_argument("--n-r", dest="n_r", type=int, help=f"rings of the disk grid (default {DEFAULT_N_R})")
    grid.add_argument("--n-theta", dest="n_theta", type=int,
                      help=f"points per ring (default {DEFAULT_N_THETA})")
    grid.add_argument("--rmax", dest="r_max", type=float, help="grid radius (default 0.95, 0.94 for 4-fold maps)")
    grid.add_argument("--nodes", type=int, help=f"Gauss-Legendre nodes (default {DEFAULT_NODES})")
    grid.add_argument("--tol", dest="tolerance", type=float, help=f"tolerance (default {DEFAULT_TOLERANCE:g})")

    parser = argparse.ArgumentParser(prog="minlift", description="Harmonic shears and their minimal-surface lifts.")
    commands = parser.add_subparsers(dest="command", required=True)

    commands.add_parser("catalog", parents=[common], help="list the catalog of harmonic maps")

    check = commands.add_parser("check", parents=[common, grid], help="run one univalence or symmetry criterion")
    target = check.add_mutually_exclusive_group(required=True)
    target.add_argument("--map", dest="map_name", help="catalog map")
    target.add_argument("--pair", type=_pair, help="two catalog maps, A,B")
    target.add_argument("--map-file", dest="map_file", type=Path,
                        help="JSON map definition, or an entry of catalog.json")
    check.add_argument("--criterion", required=True, choices=CRITERIA)
    check.add_argument("--beta", type=float, help="convexity direction angle (default pi/2)")
    check.add_argument("--alpha", type=float, help="Koepf/Taylor alpha (default: search 64 angles)")
    check.add_argument("--k", type=int, help="rotational symmetry order")
    check.add_argument("--phi-convention", dest="phi_convention", choices=CONVENTIONS,
                       help="shear h - e^{2i beta} g (css, default) or h - g (difference)")
    check.add_argument("--radius", type=float, help="boundary circle for injectivity (default 0.9 * rmax)")
    check.add_argument("--n-boundary", dest="n_boundary", type=int,
                       help=f"boundary samples (default {BOUNDARY_POINTS})")

    lift = commands.add_parser("lift", parents=[common, grid], help="lift one harmonic map to a mesh")
    source = lift.add_mutually_exclusive_group(required=True)
    source.add_argument("--map", dest="map_name", choices=CATALOG_NAMES)
    source.add_argument("--map-file", dest="map_file", type=Path,
                        help="JSON map definition, or an entry of catalog.json")
    lift.add_argument("--format", dest="fmt", choices=FORMATS)

    sweep = commands.add_parser("sweep", parents=[common, grid], help="lift and verify a deformation family")
    sweep.add_argument("--family", choices=tuple(FAMILIES))
    start = sweep.add_mutually_exclusive_group()
    start.add_argument("--from", dest="endpoint_a", help="catalog map at s = 0")
    start.add_argument("--from-file", dest="file_a", type=Path, help="JSON map definition at s = 0")
    end = sweep.add_mutually_exclusive_group()
    end.add_argument("--to", dest="endpoint_b", help="catalog map at s = 1")
    end.add_argument("--to-file", dest="file_b", type=Path, help="JSON map definition at s = 1")
    sweep.add_argument("--steps", type=int, help="equally spaced members, endpoints included (default 6)")
    sweep.add_argument("--format", dest="fmt", choices=FORMATS)
    sweep.add_argument("--samples", type=int, help="random interior points for |H| and the Laplacian (default 50)")
    sweep.add_argument("--seed", type=int, help="seed of the interior samples (default 0)")
    sweep.add_argument("--threads", type=int, help="worker threads (default MINLIFT_THREADS or CPU count)")
    sweep.add_argument("--n-boundary", dest="n_boundary", type=int,
                       help=f"boundary samples per member (default {BOUNDARY_POINTS})")
    return parser


def load_map(path: Path) -> HarmonicMap:
    """A HarmonicMap from a JSON file holding its definition, or a catalog.json entry with one."""
    try:
        data = json.loads(Path(path).read_text())
    except OSError as error:
        raise MeshIOError(f"cannot read map file {path}: {error}") from error
    try:
        return HarmonicMap.from_json(data.get("definition", data))
    except (KeyError, TypeError, AttributeError) as error:
        raise ValueError(f"{path} does not define a harmonic map (missing or bad {error})") from error


def _resolve(name: Optional[str], path: Optional[Path]) -> HarmonicMap:
    return load_map(path) if path is not None else catalog(name)


def _write_report(config: RunConfig, filename: str, payload) -> Path:
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    return atomic_write_text(config.out / filename, text)


def _show(frame: pd.DataFrame):
    print(frame.to_string(index=False))


def cmd_catalog(config: RunConfig) -> int:
    rows, entries = [], []
    for name in CATALOG_NAMES:
        f = catalog(name)
        rows.append({"name": name, "h": str(f.h), "g": str(f.g), "q": str(f.q),
                     "omega": f.omega_label, "r_max": f.r_max})
        entries.append({**rows[-1], "definition": f.to_json()})
    _show(pd.DataFrame(rows))
    _write_report(config, "catalog.json", entries)
    return EXIT_PASS


def _report_row(report, target):
    return {"criterion": report.criterion, "target": target, "min_value": report.min_value,
            "argmin": f"{report.argmin.real:+.6f}{report.argmin.imag:+.6f}i",
            "tolerance": report.tolerance, "passed": report.passed, "strict": report.strict}


def _check_prime_ends(config, f, grid):
    phi = shear(f, config.beta, config.phi_convention)
    scan = scan_prime_ends(phi, grid.r_max, eval_r_max=f.r_max)
    _show(pd.DataFrame({"r": scan.radii, "sup_angle": scan.sup_angles, "sup": scan.sup_values,
                        "inf_angle": scan.inf_angles, "inf": scan.inf_values}))
    _write_report(config, f"check_{f.name}_prime-ends.json",
                  {"map": f.name, "phi": str(phi), "convention": config.phi_convention, **scan.to_dict()})
    return EXIT_PASS


def cmd_check(config: RunConfig) -> int:
    if config.criterion == "dilatation-equal":
        a, b = (catalog(name) for name in config.pair)
        grid = config.grid(min(a.r_max, b.r_max))
        report = dilatation_report(a, b, grid, config.tolerance_or(DEFAULT_TOLERANCE))
        target = f"{a.name},{b.name}"
    else:
        f = _resolve(config.map_name, config.map_file)
        grid = config.grid(f.r_max)
        target = f.name
        if config.criterion == "prime-ends":
            return _check_prime_ends(config, f, grid)
        tolerance = config.tolerance_or(DEFAULT_TOLERANCE)
        phi = shear(f, config.beta, config.phi_convention)
        if config.criterion == "local-univalence":
            report = check_local_univalence(f, grid, tolerance)
        elif config.criterion == "hs":
            report = check_hs(phi, grid, tolerance, f.r_max)
        elif config.criterion in ("koepf", "taylor"):
            if config.alpha is None:
                report = search_alpha(phi, config.beta, grid, config.criterion, tolerance=tolerance,
                                      r_max=f.r_max)
            else:
                check = check_koepf if config.criterion == "koepf" else check_taylor
                report = check(phi, config.beta, config.alpha, grid, tolerance, f.r_max)
        elif config.criterion == "css":
            report = check_css_univalence(f, config.beta, grid, tolerance, config.phi_convention)
        elif config.criterion == "symmetry":
            report = check_rotational_symmetry(f, config.k, grid, config.tolerance_or(SYMMETRY_TOLERANCE))
        else:
            radius = config.radius if config.radius is not None else 0.9 * grid.r_max
            report = check_injectivity_boundary(f, radius, config.n_boundary)
    _show(pd.DataFrame([_report_row(report, target)]))
    _write_report(config, f"check_{target.replace(',', '_')}_{config.criterion}.json",
                  {"target": target, **report.to_dict()})
    return EXIT_PASS if report.passed else EXIT_FAIL


def _mesh_row(mesh):
    inside = mesh.radius_mask()
    return {"map": mesh.name, "vertices": len(mesh.vertices), "quads": mesh.n_quads,
            "triangles": mesh.n_triangles, "min_lambda": float(np.min(mesh.lam)),
            "max_iso_ratio": float(np.max(mesh.iso_ratio()[inside])), "max_H": float(np.max(mesh.h_est))}


def cmd_lift(config: RunConfig) -> int:
    f = _resolve(config.map_name, config.map_file)
    mesh = build_mesh(f, config.grid(f.r_max), config.nodes)
    path = export(mesh, config.fmt, config.out / f"lift_{f.name}.{config.fmt}")
    row = _mesh_row(mesh)
    _show(pd.DataFrame([row]))
    _write_report(config, f"lift_{f.name}_summary.json", {**row, "grid": list(mesh.grid), "file": path.name})
    return EXIT_PASS


def cmd_sweep(config: RunConfig) -> int:
    endpoints = None
    if config.family:
        entry = family(config.family)
    elif config.file_a is None and config.file_b is None:
        entry = family_for(config.endpoint_a, config.endpoint_b)
    else:
        endpoints = (_resolve(config.endpoint_a, config.file_a), _resolve(config.endpoint_b, config.file_b))
        entry = family_of(*endpoints)
    model = FamilySweep(family=entry, steps=config.steps, n_r=config.n_r, n_theta=config.n_theta,
                        r_max=config.r_max, nodes=config.nodes,
                        tolerance=config.tolerance_or(DEFAULT_TOLERANCE), samples=config.samples,
                        boundary_points=config.n_boundary, seed=config.seed, threads=config.threads,
                        endpoints=endpoints)
    model.step()
    files = [export(mesh, config.fmt, config.out / mesh_filename(entry.name, s, config.fmt)).name
             for s, mesh in model.meshes]
    _show(model.table().reset_index())
    _write_report(config, f"family_{entry.name}_summary.json", {**model.summary(), "files": files})
    return EXIT_PASS if model.all_passed else EXIT_FAIL


COMMANDS = {"catalog": cmd_catalog, "check": cmd_check, "lift": cmd_lift, "sweep": cmd_sweep}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as stop:
        return stop.code if isinstance(stop.code, int) else EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = RunConfig.from_args(args)
    except ValueError as error:
        print(f"minlift: error: {error}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[config.command](config)
    except UnknownNameError as error:
        print(f"minlift: error: {error}", file=sys.stderr)
        return EXIT_USAGE
    except DilatationMismatchError as error:
        print(f"minlift: {error}", file=sys.stderr)
        return EXIT_FAIL
    except (DomainError, PoleError, DegenerateCurveError, MeshIOError) as error:
        print(f"minlift: {type(error).__name__}: {error}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as error:
        print(f"minlift: error: {error}", file=sys.stderr)
        return EXIT_USAGE


def run():
    sys.exit(main())
