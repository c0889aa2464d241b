"""World building: chain move -> distort -> restore into a navigable scene graph.

The on-disk layout of a built world:

    <out>/world.json                 manifest (schema below)
    <out>/scenes/<id>.png            restored scene panoramas
    <out>/scenes/<id>.distorted.png  pre-restoration intermediates, kept for
                                     inspection of the raw geometric warp

``world.json`` holds ``scenes`` (id, image, prompt), ``edges`` (from, to,
displacement) and ``metadata`` (created_at, tool_version, remap_method,
partial). ``created_at`` honors SOURCE_DATE_EPOCH so rebuilds can be
byte-identical.
"""

from __future__ import annotations

import json
import os
import shutil
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from PIL import Image as PILImage

from ._version import __version__
from .errors import ExportError, PartialBuildError, RestorerError, WorldConfigError
from .geometry import Displacement
from .image import EquirectImage, load_image, save_image
from .remap import Interpolation, RemapMethod, reproject_image
from .restorer import DEFAULT_STRENGTH, RestoreRequest, RestorerConfig, make_restorer

MANIFEST_NAME = "world.json"


@dataclass(frozen=True)
class Move:
    id: str
    step: float
    direction: float
    prompt: str | None = None  # None inherits the world prompt


@dataclass(frozen=True)
class Scene:
    id: str
    image: str  # path relative to the manifest
    prompt: str


@dataclass(frozen=True)
class Edge:
    from_id: str
    to_id: str
    displacement: Displacement


@dataclass(frozen=True)
class WorldGraph:
    scenes: tuple[Scene, ...]
    edges: tuple[Edge, ...]
    metadata: dict
    base_dir: Path | None = None  # directory holding the manifest; not serialized

    def to_dict(self) -> dict:
        return {
            "scenes": [
                {"id": s.id, "image": s.image, "prompt": s.prompt} for s in self.scenes
            ],
            "edges": [
                {
                    "from": e.from_id,
                    "to": e.to_id,
                    "displacement": {
                        "step": e.displacement.step,
                        "direction": e.displacement.direction,
                    },
                }
                for e in self.edges
            ],
            "metadata": self.metadata,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, data: dict, base_dir: Path | None = None) -> "WorldGraph":
        scenes = tuple(
            Scene(s["id"], s["image"], s.get("prompt", "")) for s in data["scenes"]
        )
        edges = tuple(
            Edge(
                e["from"],
                e["to"],
                Displacement(e["displacement"]["step"], e["displacement"]["direction"]),
            )
            for e in data["edges"]
        )
        return cls(scenes, edges, dict(data.get("metadata", {})), base_dir)

    @classmethod
    def from_file(cls, path: str | Path) -> "WorldGraph":
        path = Path(path)
        data = json.loads(path.read_text(encoding="utf-8"))
        return cls.from_dict(data, base_dir=path.parent)


@dataclass(frozen=True)
class WorldConfig:
    initial_image: Path
    prompt: str
    moves: tuple[Move, ...]
    restorer: RestorerConfig = RestorerConfig()
    method: RemapMethod = RemapMethod.ORACLE_3D
    interpolation: Interpolation = Interpolation.BILINEAR
    initial_id: str = "start"
    strength: float = DEFAULT_STRENGTH
    seed: int | None = None
    output_dir: Path | None = None

    def __post_init__(self):
        ids = [self.initial_id] + [m.id for m in self.moves]
        dupes = {i for i in ids if ids.count(i) > 1}
        if dupes:
            raise WorldConfigError(f"scene ids must be unique, repeated: {sorted(dupes)}")
        for m in self.moves:
            if not 0.0 < m.step < 1.0:
                raise WorldConfigError(
                    f"move {m.id!r}: step must lie in (0, 1), got {m.step!r}"
                )

    @classmethod
    def from_dict(cls, data: dict, base_dir: Path | None = None) -> "WorldConfig":
        base = Path(base_dir) if base_dir is not None else Path(".")
        try:
            initial = data["initial"]
            image = base / initial["image"]
            prompt = initial["prompt"]
        except (KeyError, TypeError) as exc:
            raise WorldConfigError(f"config lacks initial.image/initial.prompt: {exc}")
        if "moves" in data and "grid" in data:
            raise WorldConfigError("config must give either moves or a grid, not both")
        if "grid" in data:
            initial_id, moves = expand_grid(data["grid"])
            initial_id = initial.get("id", initial_id)
        else:
            initial_id = initial.get("id", "start")
            try:
                moves = tuple(
                    Move(m["id"], float(m["step"]), float(m["direction"]),
                         m.get("prompt"))
                    for m in data.get("moves", [])
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise WorldConfigError(f"malformed move entry: {exc}")
        try:
            restorer = RestorerConfig(**data.get("restorer", {"kind": "identity"}))
        except (TypeError, ValueError) as exc:
            raise WorldConfigError(f"bad restorer config: {exc}")
        try:
            method = RemapMethod(data.get("method", "oracle3d"))
            interp = Interpolation(data.get("interpolation", "bilinear"))
        except ValueError as exc:
            raise WorldConfigError(str(exc))
        out = data.get("output_dir")
        return cls(
            initial_image=image,
            prompt=prompt,
            moves=moves,
            restorer=restorer,
            method=method,
            interpolation=interp,
            initial_id=initial_id,
            strength=float(data.get("strength", DEFAULT_STRENGTH)),
            seed=data.get("seed"),
            output_dir=(base / out) if out else None,
        )

    @classmethod
    def from_file(cls, path: str | Path) -> "WorldConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise WorldConfigError(f"{path}: not valid JSON: {exc}")
        return cls.from_dict(data, base_dir=path.parent)


def expand_grid(grid: dict) -> tuple[str, tuple[Move, ...]]:
    """Serpentine row-major expansion of {rows, cols, step} into moves.

    Even rows walk east (direction 0), odd rows walk west (180), and rows
    advance at 90; every adjacent pair of visited cells is one move apart.
    Returns the initial cell id (r0c0) and the move list.
    """
    try:
        rows, cols, step = int(grid["rows"]), int(grid["cols"]), float(grid["step"])
    except (KeyError, TypeError, ValueError) as exc:
        raise WorldConfigError(f"grid spec needs rows/cols/step: {exc}")
    if rows < 1 or cols < 1:
        raise WorldConfigError("grid must have at least one row and column")
    moves = []
    for r in range(rows):
        cells = range(1, cols) if r % 2 == 0 else range(cols - 2, -1, -1)
        direction = 0.0 if r % 2 == 0 else 180.0
        for c in cells:
            moves.append(Move(f"r{r}c{c}", step, direction))
        if r + 1 < rows:
            c_end = cols - 1 if r % 2 == 0 else 0
            moves.append(Move(f"r{r + 1}c{c_end}", step, 90.0))
    return "r0c0", tuple(moves)


def _created_at() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is not None:
        when = datetime.fromtimestamp(int(epoch), tz=timezone.utc)
    else:
        when = datetime.now(tz=timezone.utc)
    return when.replace(microsecond=0).isoformat()


def _write_manifest(out_dir: Path, graph: WorldGraph) -> Path:
    path = out_dir / MANIFEST_NAME
    path.write_text(graph.to_json(), encoding="utf-8")
    return path


def build_world(cfg: WorldConfig, *, threads: int | None = None) -> WorldGraph:
    """Run the move -> distort -> restore chain and persist everything.

    If restoration fails at move k, the completed scenes stay on disk, the
    manifest is written with ``metadata.partial`` set, and a
    :class:`PartialBuildError` naming the failing scene is raised.
    """
    if cfg.output_dir is None:
        raise WorldConfigError("an output directory is required to build a world")
    try:
        current = load_image(cfg.initial_image)
    except (OSError, ValueError) as exc:
        raise WorldConfigError(f"initial scene rejected: {exc}")
    restorer = make_restorer(cfg.restorer)

    out_dir = Path(cfg.output_dir)
    scenes_dir = out_dir / "scenes"
    scenes_dir.mkdir(parents=True, exist_ok=True)

    metadata = {
        "created_at": _created_at(),
        "tool_version": __version__,
        "remap_method": cfg.method.value,
        "partial": False,
    }
    scenes = [Scene(cfg.initial_id, f"scenes/{cfg.initial_id}.png", cfg.prompt)]
    edges: list[Edge] = []
    save_image(current, scenes_dir / f"{cfg.initial_id}.png")

    for move in cfg.moves:
        disp = Displacement(move.step, move.direction)
        prompt = move.prompt if move.prompt is not None else cfg.prompt
        distorted = reproject_image(
            current, disp, cfg.method, cfg.interpolation, threads=threads
        )
        save_image(distorted, scenes_dir / f"{move.id}.distorted.png")
        try:
            restored = restorer.restore(
                RestoreRequest(distorted, prompt, cfg.strength, cfg.seed)
            )
        except RestorerError as exc:
            exc.scene_id = move.id
            metadata["partial"] = True
            partial = WorldGraph(tuple(scenes), tuple(edges), metadata, out_dir)
            manifest = _write_manifest(out_dir, partial)
            raise PartialBuildError(
                f"restoration failed at scene {move.id!r}: {exc}",
                scene_id=move.id, manifest_path=manifest, cause=exc,
            ) from exc
        save_image(restored, scenes_dir / f"{move.id}.png")
        edges.append(Edge(scenes[-1].id, move.id, disp))
        scenes.append(Scene(move.id, f"scenes/{move.id}.png", prompt))
        current = restored

    graph = WorldGraph(tuple(scenes), tuple(edges), metadata, out_dir)
    _write_manifest(out_dir, graph)
    return graph


def validate_manifest(path: str | Path) -> list[str]:
    """Check a world manifest against the graph invariants.

    Returns a list of human-readable violations (empty means valid). An
    unreadable file raises OSError; unparseable JSON raises
    json.JSONDecodeError.
    """
    path = Path(path)
    data = json.loads(path.read_text(encoding="utf-8"))
    violations: list[str] = []
    scenes = data.get("scenes")
    edges = data.get("edges")
    if not isinstance(scenes, list) or not isinstance(edges, list):
        return ["malformed: manifest needs scenes and edges arrays"]
    if not scenes:
        return ["malformed: manifest lists no scenes"]

    ids = []
    for s in scenes:
        if not isinstance(s, dict) or "id" not in s or "image" not in s:
            violations.append(f"malformed: scene entry {s!r} needs id and image")
            continue
        ids.append(s["id"])
    known = set(ids)
    for i in known:
        if ids.count(i) > 1:
            violations.append(f"duplicate-id: scene id {i!r} appears {ids.count(i)} times")

    adjacency: dict[str, list[str]] = {}
    for e in edges:
        try:
            src, dst = e["from"], e["to"]
            disp = e["displacement"]
            step = float(disp["step"])
        except (KeyError, TypeError, ValueError):
            violations.append(f"malformed: edge entry {e!r}")
            continue
        for endpoint in (src, dst):
            if endpoint not in known:
                violations.append(
                    f"dangling-edge: edge {src!r}->{dst!r} references unknown id {endpoint!r}"
                )
        if not 0.0 < step < 1.0:
            violations.append(
                f"bad-displacement: edge {src!r}->{dst!r} step {step!r} outside (0, 1)"
            )
        adjacency.setdefault(src, []).append(dst)

    if ids:
        reached = {ids[0]}
        frontier = [ids[0]]
        while frontier:
            for nxt in adjacency.get(frontier.pop(), []):
                if nxt not in reached:
                    reached.add(nxt)
                    frontier.append(nxt)
        for orphan in [i for i in ids if i not in reached]:
            violations.append(
                f"unreachable: scene {orphan!r} is not connected from {ids[0]!r}"
            )

    dims_seen: dict[tuple[int, int], str] = {}
    for s in scenes:
        if not isinstance(s, dict) or "image" not in s:
            continue
        img_path = path.parent / s["image"]
        if not img_path.is_file():
            violations.append(f"missing-file: {s['image']} for scene {s.get('id')!r}")
            continue
        with PILImage.open(img_path) as im:
            w, h = im.size
        if w != 2 * h:
            violations.append(f"bad-dims: {s['image']} is {w}x{h}, not 2:1")
        dims_seen.setdefault((w, h), str(s.get("id")))
    if len(dims_seen) > 1:
        violations.append(f"inconsistent-dims: scene images mix sizes {sorted(dims_seen)}")
    return violations


def _viewer_asset_dir() -> Path:
    return Path(__file__).resolve().parent / "viewer_assets"


def export_viewer(graph: WorldGraph, out_dir: str | Path) -> Path:
    """Write a self-contained, statically servable bundle of the world.

    Copies scene images (and distorted intermediates when present), writes
    the manifest, and drops in the embedded viewer. Re-exporting over an
    existing bundle rewrites identical bytes.
    """
    out_dir = Path(out_dir)
    (out_dir / "scenes").mkdir(parents=True, exist_ok=True)
    failures: list[tuple[str, str]] = []

    src_base = graph.base_dir
    for scene in graph.scenes:
        rel_paths = [scene.image]
        distorted = scene.image.replace(".png", ".distorted.png")
        if src_base is not None and (src_base / distorted).is_file():
            rel_paths.append(distorted)
        for rel in rel_paths:
            dst = out_dir / rel
            src = (src_base / rel) if src_base is not None else dst
            if src == dst:
                if not dst.is_file():
                    failures.append((rel, "source image missing"))
                continue
            try:
                shutil.copyfile(src, dst)
            except OSError as exc:
                failures.append((rel, str(exc)))

    try:
        _write_manifest(out_dir, graph)
    except OSError as exc:
        failures.append((MANIFEST_NAME, str(exc)))

    for asset in sorted(_viewer_asset_dir().iterdir()):
        try:
            shutil.copyfile(asset, out_dir / asset.name)
        except OSError as exc:
            failures.append((asset.name, str(exc)))

    if failures:
        raise ExportError(failures)
    return out_dir
