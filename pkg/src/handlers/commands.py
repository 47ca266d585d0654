"""
Command handlers: fit, ridge, check and synth.

Every handler returns a process exit code: 0 on success, 2 when the command
ran but the outcome is negative (fit not converged, all cylinders skipped,
mesh defects), 1 on errors.
"""

import argparse
import json
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence

from loguru import logger
from pydantic import TypeAdapter, ValidationError

from src.config.loader import load_config
from src.config.schemas import (
    Config,
    CylinderSpec,
    PullTarget,
    RidgeReport,
    RidgeSkipModel,
)
from src.config.settings import runtime_settings
from src.errors import ConfigError, DegenerateGeometryError, RejectedCylinderError, TemplateFitError
from src.geom.primitives import Cylinder, Plane
from src.mesh.io import atomic_write_text, read_obj, read_tetgen, staged_directory, write_obj_file, write_tetgen_files
from src.mesh.synth import jitter_surface, synth_ellipsoid, synth_sphere, synth_sphere_tet
from src.mesh.types import tet_boundary
from src.mesh.validate import TEMPLATE_DIMENSIONS, compare_expected, validate_surface, validate_tet
from src.ridge.cylinder_ridge import RidgeTargets, cylinder_ridge
from src.solver.fit import fit, load_template
from src.utils.metrics import get_metrics_collector

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NEGATIVE = 2

SHAPES = ("sphere", "sphere-tet", "ellipsoid")


class CommandParser(argparse.ArgumentParser):
    """ArgumentParser that reports usage errors as ConfigError instead of exiting."""

    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def configure_logging(quiet: bool = False):
    logger.remove()
    logger.add(sys.stderr, level="WARNING" if quiet else runtime_settings.log_level)


def _resolve_config(args) -> Config:
    return load_config(args.config, args.set or ())


def _require_file(path: Optional[Path], flag: str) -> Path:
    if path is None:
        raise ConfigError(f"{flag} is required")
    if not Path(path).is_file():
        raise ConfigError(f"{flag}: file not found: {path}")
    return Path(path)


def _read_json(path: Path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path} is not valid JSON: {e}") from e


# ==================== fit ====================
def _load_ridge_targets(path: Path) -> List[RidgeTargets]:
    report = RidgeReport.model_validate(_read_json(path))
    return [
        RidgeTargets(
            entries=[(e.index, e.target) for e in result.entries],
            plane=Plane(result.plane.point, result.plane.normal),
            kappa_values=[e.kappa for e in result.entries],
        )
        for result in report.results
    ]


def cmd_fit(args) -> int:
    config = _resolve_config(args)
    paths = config.paths.model_copy(update={
        k: v for k, v in {
            "target": args.target,
            "template_dir": args.template_dir,
            "output_dir": args.out,
            "ridge": args.ridge,
            "pull": args.pull,
            "forbidden": args.forbidden,
        }.items() if v is not None
    })

    target_path = _require_file(paths.target, "--target")
    if paths.template_dir is None or not Path(paths.template_dir).is_dir():
        raise ConfigError(f"--template-dir: directory not found: {paths.template_dir}")
    if paths.output_dir is None:
        raise ConfigError("--out is required")
    ridge = _load_ridge_targets(_require_file(paths.ridge, "--ridge")) if paths.ridge else []
    pulls = (
        TypeAdapter(List[PullTarget]).validate_python(_read_json(_require_file(paths.pull, "--pull")))
        if paths.pull else []
    )
    forbidden = read_obj(_require_file(paths.forbidden, "--forbidden")) if paths.forbidden else None

    template = load_template(paths.template_dir)
    target = read_obj(target_path)
    metrics = get_metrics_collector()
    metrics.reset()
    result = fit(template, target, ridge, config.weights, config.params, pulls, forbidden, metrics)

    out = Path(paths.output_dir)
    with staged_directory(out) as staging:
        write_obj_file(staging / "fitted_surface.obj", result.surface())
        for component, mesh in result.tet_meshes().items():
            write_tetgen_files(staging / f"fitted_tet_{component.value}", mesh)
        atomic_write_text(staging / "report.json", result.report.model_dump_json(indent=2))
    metrics.log_metrics()

    last = result.report.iterations[-1] if result.report.iterations else None
    print(
        f"fit: {'converged' if result.converged else 'NOT converged'} after {len(result.report.iterations)} outer iteration(s); "
        f"mean surface distance {result.report.initial_mean_surface_dist:.6g} -> {last.mean_surface_dist if last else float('nan'):.6g} m; "
        f"wrote {out}"
    )
    return EXIT_OK if result.converged else EXIT_NEGATIVE


# ==================== ridge ====================
def _cylinder_specs(data) -> List[CylinderSpec]:
    if isinstance(data, dict):
        data = data.get("cylinders", [])
    return TypeAdapter(List[CylinderSpec]).validate_python(data)


def cmd_ridge(args) -> int:
    config = _resolve_config(args)
    head = read_obj(_require_file(args.head, "head"))
    cylinders_path = _require_file(args.cylinders, "--cylinders")
    specs = _cylinder_specs(_read_json(cylinders_path)) if cylinders_path.read_text(encoding="utf-8").strip() else []
    if args.out is None:
        raise ConfigError("--out is required")

    report = RidgeReport()
    for position, spec in enumerate(specs):
        try:
            cylinder = Cylinder(spec.start, spec.end, spec.radius or config.params.cylinder_radius)
            targets = cylinder_ridge(head, cylinder, config.params.l_min)
        except RejectedCylinderError as e:
            report.skipped.append(RidgeSkipModel(cylinder=position, reason=e.reason))
            logger.warning(f"Cylinder {position} skipped: {e.reason}")
            continue
        except DegenerateGeometryError as e:
            report.skipped.append(RidgeSkipModel(cylinder=position, reason=str(e)))
            logger.warning(f"Cylinder {position} skipped: {e}")
            continue
        report.results.append(targets.to_model(position))
        logger.info(f"Cylinder {position}: {len(targets)} ridge targets")

    atomic_write_text(args.out, report.model_dump_json(indent=2))
    print(f"ridge: {len(report.results)} cylinder(s) processed, {len(report.skipped)} skipped; wrote {args.out}")
    if not report.results:
        logger.warning("No cylinder produced ridge targets")
        return EXIT_NEGATIVE
    return EXIT_OK


# ==================== check ====================
def cmd_check(args) -> int:
    _resolve_config(args)
    path = _require_file(args.mesh, "mesh")
    boundary_faces = None
    if path.suffix.lower() in (".node", ".ele"):
        mesh = read_tetgen(path)
        report = validate_tet(mesh)
        if report.ok:
            boundary_faces = tet_boundary(mesh)[0].face_count
    else:
        report = validate_surface(read_obj(path))

    print(report.to_json())
    if args.report is not None:
        atomic_write_text(args.report, report.to_json())

    passed = report.ok
    if args.expect:
        expectation = compare_expected(report, args.expect, boundary_faces)
        print(expectation.model_dump_json(indent=2))
        passed = passed and expectation.matched
    for defect in report.defects:
        logger.warning(f"{path}: {defect}")
    return EXIT_OK if passed else EXIT_NEGATIVE


# ==================== synth ====================
def cmd_synth(args) -> int:
    _resolve_config(args)
    if args.out is None:
        raise ConfigError("--out is required")
    out = Path(args.out)
    if args.shape == "sphere-tet":
        mesh = synth_sphere_tet(args.resolution, args.radius)
        node, ele = write_tetgen_files(out, mesh)
        print(f"synth: {mesh.vertex_count} nodes, {mesh.tet_count} tets; wrote {node} and {ele}")
        return EXIT_OK

    if args.shape == "ellipsoid":
        mesh = synth_ellipsoid(args.subdivisions, args.radius, args.axes)
    else:
        mesh = synth_sphere(args.subdivisions, args.radius)
    mesh = jitter_surface(mesh, args.jitter, args.seed)
    if not out.suffix:
        out = out.with_suffix(".obj")
    write_obj_file(out, mesh)
    print(f"synth: {mesh.vertex_count} vertices, {mesh.face_count} faces; wrote {out}")
    return EXIT_OK


# ==================== parser ====================
COMMANDS: Dict[str, Callable] = {
    "fit": cmd_fit,
    "ridge": cmd_ridge,
    "check": cmd_check,
    "synth": cmd_synth,
}


def build_parser() -> CommandParser:
    common = CommandParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON config file")
    common.add_argument("--set", action="append", metavar="KEY=VALUE", help="Override a config key, e.g. params.pd_iterations=10 (repeatable)")
    common.add_argument("--seed", type=int, default=0, help="Seed for all randomness")
    common.add_argument("--quiet", action="store_true", help="Only log warnings and errors")

    parser = CommandParser(prog="template-fit", description="Fit tetrahedral templates to surface targets.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=CommandParser)

    p = sub.add_parser("fit", parents=[common], help="Fit a template to a target surface")
    p.add_argument("--target", type=Path, help="Target surface OBJ")
    p.add_argument("--template-dir", type=Path, help="Directory with tet_S.node/.ele")
    p.add_argument("--out", type=Path, help="Output directory")
    p.add_argument("--ridge", type=Path, help="Ridge targets JSON from the ridge command")
    p.add_argument("--pull", type=Path, help="JSON list of {index, target} landmark pulls")
    p.add_argument("--forbidden", type=Path, help="Closed OBJ the boundary must stay outside of")

    p = sub.add_parser("ridge", parents=[common], help="Generate cylinder ridge targets")
    p.add_argument("head", type=Path, help="Head surface OBJ")
    p.add_argument("--cylinders", type=Path, required=True, help="Cylinders JSON")
    p.add_argument("--out", type=Path, help="Ridge targets JSON to write")

    p = sub.add_parser("check", parents=[common], help="Validate a mesh file")
    p.add_argument("mesh", type=Path, help=".obj surface or .node/.ele tet mesh")
    p.add_argument("--expect", choices=sorted(TEMPLATE_DIMENSIONS), help="Compare counts with a template component")
    p.add_argument("--report", type=Path, help="Also write the MeshReport JSON here")

    p = sub.add_parser("synth", parents=[common], help="Write a synthetic fixture mesh")
    p.add_argument("--shape", choices=SHAPES, default="sphere")
    p.add_argument("--subdivisions", type=int, default=3)
    p.add_argument("--resolution", type=int, default=8)
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--axes", type=float, nargs=3, default=(1.0, 1.2, 0.8), metavar=("AX", "AY", "AZ"))
    p.add_argument("--jitter", type=float, default=0.0, help="Radial jitter amplitude (m)")
    p.add_argument("--out", type=Path, help="Output path (.obj, or TetGen base path for sphere-tet)")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except ConfigError as e:
        configure_logging()
        logger.error(str(e))
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR

    configure_logging(args.quiet)
    try:
        return COMMANDS[args.command](args)
    except (TemplateFitError, ValidationError, OSError, ValueError, IndexError) as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
