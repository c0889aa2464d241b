"""Command-line interface.

Exit codes: 0 success, 1 runtime failure, 2 invalid arguments or config,
3 partial world build (completed prefix preserved, manifest marked partial).
"""

from __future__ import annotations

import json
import sys
import time
from pathlib import Path

import click

from ._version import __version__
from .errors import PanostepError, PartialBuildError, WorldConfigError
from .geometry import Displacement, ImageDims
from .image import load_image, save_image
from .remap import Interpolation, RemapMethod, compare_methods, reproject_image
from .restorer import RestorerConfig
from .world import WorldConfig, build_world, export_viewer, validate_manifest

EXIT_RUNTIME = 1
EXIT_USAGE = 2
EXIT_PARTIAL = 3


def _fail(message: str, code: int) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _emit(summary: dict, as_json: bool) -> None:
    if as_json:
        click.echo(json.dumps(summary, sort_keys=True))
    else:
        for key, value in summary.items():
            click.echo(f"{key}: {value}")


def _step_option(required=True):
    def check(ctx, param, value):
        if value is not None and not 0.0 <= value < 1.0:
            raise click.BadParameter("must lie in [0, 1); 1 puts the observer on the sphere")
        return value

    return click.option("--step", type=float, required=required, callback=check,
                        help="displacement as a fraction of the sphere radius, in [0, 1)")


@click.group()
@click.version_option(version=__version__, prog_name="panostep")
def main():
    """Equirectangular panorama translation and world building."""


@main.command("reproject")
@click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False),
              required=True, help="source panorama (PNG or JPEG, 2:1)")
@_step_option()
@click.option("--direction", type=float, required=True,
              help="displacement azimuth in degrees")
@click.option("--output", "output_path", type=click.Path(dir_okay=False), required=True,
              help="output image path (PNG recommended)")
@click.option("--method", type=click.Choice([m.value for m in RemapMethod]),
              default=RemapMethod.ORACLE_3D.value, show_default=True)
@click.option("--interp", type=click.Choice([i.value for i in Interpolation]),
              default=Interpolation.BILINEAR.value, show_default=True)
@click.option("--threads", type=int, default=None,
              help="worker threads for the warp [default: logical cores]")
@click.option("--json", "as_json", is_flag=True, help="machine-readable summary")
def cmd_reproject(input_path, step, direction, output_path, method, interp, threads,
                  as_json):
    """Warp a panorama to the view from a displaced observer."""
    try:
        image = load_image(input_path)
    except (OSError, ValueError) as exc:
        _fail(str(exc), EXIT_RUNTIME)
    t0 = time.perf_counter()
    out = reproject_image(
        image, Displacement(step, direction),
        RemapMethod(method), Interpolation(interp), threads=threads,
    )
    elapsed = time.perf_counter() - t0
    try:
        save_image(out, output_path)
    except OSError as exc:
        _fail(str(exc), EXIT_RUNTIME)
    _emit(
        {
            "input": input_path,
            "output": output_path,
            "width": out.dims.width,
            "height": out.dims.height,
            "step": step,
            "direction": direction,
            "method": method,
            "interp": interp,
            "seconds": round(elapsed, 4),
        },
        as_json,
    )


@main.command("validate-math")
@click.option("--width", type=int, required=True, help="panorama width in pixels (even)")
@_step_option()
@click.option("--direction", type=float, default=0.0, show_default=True)
@click.option("--report", "report_prefix", type=click.Path(), default=None,
              help="write <prefix>.csv and <prefix>.png error reports")
@click.option("--json", "as_json", is_flag=True)
def cmd_validate_math(width, step, direction, report_prefix, as_json):
    """Compare the closed-form maps against the 3D oracle.

    Exits 0 when the closed horizontal form matches the oracle on the exact
    equator to < 1e-9 rad; the full-frame deviation is reported, not judged.
    """
    if width < 2 or width % 2:
        raise click.BadParameter("--width must be an even integer >= 2")
    dims = ImageDims(width, width // 2)
    cm = compare_methods(dims, Displacement(step, direction),
                         keep_grid=report_prefix is not None)
    summary = {
        "width": width,
        "height": width // 2,
        "step": step,
        "direction": direction,
        "max_error_rad": cm.max_error_rad,
        "mean_error_rad": cm.mean_error_rad,
        "worst_pixel_x": cm.worst_pixel[0],
        "worst_pixel_y": cm.worst_pixel[1],
        "equator_max_error_rad": cm.equator_max_error_rad,
        "equator_exact": cm.equator_exact,
    }
    if report_prefix is not None:
        from .report import write_report  # matplotlib import is slow; defer

        csv_path, fig_path = write_report(cm, report_prefix)
        summary["report_csv"] = str(csv_path)
        summary["report_figure"] = str(fig_path)
    _emit(summary, as_json)
    if not cm.equator_exact:
        _fail(
            f"equator error {cm.equator_max_error_rad:.3e} rad exceeds 1e-9",
            EXIT_RUNTIME,
        )


@main.command("build-world")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              required=True, help="world config JSON")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), required=True,
              help="output directory for scenes and world.json")
@click.option("--restorer", "restorer_kind",
              type=click.Choice(["identity", "http"]), default=None,
              help="override the config's restorer kind")
@click.option("--endpoint", type=str, default=None,
              help="override the restorer endpoint URL "
                   "(PANO_RESTORER_ENDPOINT beats both)")
@click.option("--export", "do_export", is_flag=True,
              help="also emit viewer assets so the output is servable as-is")
@click.option("--threads", type=int, default=None)
@click.option("--json", "as_json", is_flag=True)
def cmd_build_world(config_path, out_dir, restorer_kind, endpoint, do_export, threads,
                    as_json):
    """Build a navigable world from a config; see README for the schema."""
    try:
        cfg = WorldConfig.from_file(config_path)
    except WorldConfigError as exc:
        _fail(str(exc), EXIT_USAGE)
    restorer = cfg.restorer
    if restorer_kind is not None or endpoint is not None:
        try:
            restorer = RestorerConfig(
                kind=restorer_kind or cfg.restorer.kind,
                endpoint=endpoint or cfg.restorer.endpoint,
                timeout=cfg.restorer.timeout,
                retries=cfg.restorer.retries,
                max_in_flight=cfg.restorer.max_in_flight,
            )
        except ValueError as exc:
            _fail(str(exc), EXIT_USAGE)
    cfg = WorldConfig(
        initial_image=cfg.initial_image,
        prompt=cfg.prompt,
        moves=cfg.moves,
        restorer=restorer,
        method=cfg.method,
        interpolation=cfg.interpolation,
        initial_id=cfg.initial_id,
        strength=cfg.strength,
        seed=cfg.seed,
        output_dir=Path(out_dir),
    )

    try:
        graph = build_world(cfg, threads=threads)
    except WorldConfigError as exc:
        _fail(str(exc), EXIT_USAGE)
    except PartialBuildError as exc:
        click.echo(f"error: {exc} (scene {exc.scene_id!r})", err=True)
        _emit(
            {
                "partial": True,
                "failed_scene": exc.scene_id,
                "manifest": str(exc.manifest_path),
            },
            as_json,
        )
        sys.exit(EXIT_PARTIAL)
    except PanostepError as exc:
        _fail(str(exc), EXIT_RUNTIME)

    violations = validate_manifest(Path(out_dir) / "world.json")
    if violations:
        _fail("built manifest failed validation: " + "; ".join(violations), EXIT_RUNTIME)

    exported = False
    if do_export:
        export_viewer(graph, out_dir)
        exported = True
    _emit(
        {
            "scenes": len(graph.scenes),
            "edges": len(graph.edges),
            "manifest": str(Path(out_dir) / "world.json"),
            "partial": False,
            "exported": exported,
        },
        as_json,
    )


if __name__ == "__main__":
    main()
