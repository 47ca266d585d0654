"""
ASCII mesh formats: the `v`/`f` subset of OBJ and TetGen `.node`/`.ele`.
"""

import io
import math
import os
import shutil
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import Iterable, Iterator, List, TextIO, Tuple, Union

import numpy as np
from loguru import logger

from src.errors import MeshParseError
from src.mesh.types import SurfaceMesh, TetMesh

TextSource = Union[str, TextIO]

# Tets below this volume, relative to the bbox diagonal cubed, count as flat.
ZERO_VOLUME_TOLERANCE = 1e-12


def _lines(source: TextSource) -> Iterable[Tuple[int, str]]:
    stream = io.StringIO(source) if isinstance(source, str) else source
    for number, line in enumerate(stream, start=1):
        yield number, line


def _float(token: str, where: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise MeshParseError(f"{where}: non-numeric coordinate '{token}'") from None
    if not math.isfinite(value):
        raise MeshParseError(f"{where}: non-finite coordinate '{token}'")
    return value


def _int(token: str, where: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise MeshParseError(f"{where}: non-integer index '{token}'") from None


# ==================== OBJ ====================
def parse_obj(text: TextSource) -> SurfaceMesh:
    """
    Parse the `v`/`f` subset of an ASCII OBJ file.

    Polygons are fan-triangulated from their first corner; every other record
    (normals, texture coordinates, groups, materials) is ignored.

    Raises:
        MeshParseError: non-numeric coordinate, face with fewer than 3 corners,
            relative (negative) index, out-of-range index, repeated corner
    """
    vertices: List[Tuple[float, float, float]] = []
    faces: List[Tuple[int, int, int]] = []
    face_lines: List[int] = []

    for number, raw in _lines(text):
        tokens = raw.split("#", 1)[0].split()
        if not tokens:
            continue
        where = f"line {number}"

        if tokens[0] == "v":
            if len(tokens) < 4:
                raise MeshParseError(f"{where}: vertex needs 3 coordinates")
            vertices.append(tuple(_float(t, where) for t in tokens[1:4]))

        elif tokens[0] == "f":
            corners = []
            for token in tokens[1:]:
                index = _int(token.split("/", 1)[0], where)
                if index < 0:
                    raise MeshParseError(f"{where}: relative (negative) indices are unsupported")
                if index == 0:
                    raise MeshParseError(f"{where}: out-of-range index 0 (OBJ indices are 1-based)")
                corners.append(index - 1)
            if len(corners) < 3:
                raise MeshParseError(f"{where}: face with {len(corners)} vertices (need at least 3)")
            if len(set(corners)) != len(corners):
                raise MeshParseError(f"{where}: face references the same vertex twice")
            for k in range(1, len(corners) - 1):
                faces.append((corners[0], corners[k], corners[k + 1]))
                face_lines.append(number)

    n = len(vertices)
    for face, number in zip(faces, face_lines):
        bad = [i + 1 for i in face if i >= n]
        if bad:
            raise MeshParseError(f"line {number}: out-of-range index {bad[0]} (only {n} vertices)")

    mesh = SurfaceMesh(np.array(vertices).reshape(-1, 3), np.array(faces, dtype=np.int64).reshape(-1, 3))
    zero_area = int(np.count_nonzero(mesh.face_areas() == 0.0)) if mesh.face_count else 0
    if zero_area:
        logger.warning(f"OBJ contains {zero_area} zero-area face(s); kept as-is")
    return mesh


def write_obj(mesh: SurfaceMesh) -> str:
    """Serialize as OBJ text with 1-based face indices and round-trip exact floats."""
    out = io.StringIO()
    out.write(f"# vertices {mesh.vertex_count} faces {mesh.face_count}\n")
    for x, y, z in mesh.vertices:
        out.write(f"v {x:.17g} {y:.17g} {z:.17g}\n")
    for a, b, c in mesh.faces + 1:
        out.write(f"f {a} {b} {c}\n")
    return out.getvalue()


# ==================== TetGen ====================
def _records(source: TextSource, what: str) -> Tuple[List[str], List[Tuple[int, List[str]]]]:
    rows = []
    for number, raw in _lines(source):
        tokens = raw.split("#", 1)[0].split()
        if tokens:
            rows.append((number, tokens))
    if not rows:
        raise MeshParseError(f"{what}: missing header line")
    return rows[0][1], rows[1:]


def _header_count(header: List[str], what: str) -> int:
    count = _int(header[0], f"{what} header")
    if count < 0:
        raise MeshParseError(f"{what} header: negative record count")
    return count


def parse_tetgen(node_text: TextSource, ele_text: TextSource) -> TetMesh:
    """
    Parse TetGen ASCII `.node` / `.ele` text into a tet mesh.

    Numbering may start at 0 or 1; the first node record decides. Negatively
    oriented tets are fixed by swapping their last two corners.

    Raises:
        MeshParseError: header/record count mismatch, index out of range,
            zero-volume tet
    """
    header, records = _records(node_text, ".node")
    n = _header_count(header, ".node")
    if len(header) > 1 and _int(header[1], ".node header") != 3:
        raise MeshParseError(".node header: only 3D meshes are supported")
    if len(records) != n:
        raise MeshParseError(f".node header declares {n} nodes but {len(records)} records follow")

    base = _int(records[0][1][0], f".node line {records[0][0]}") if records else 0
    vertices = np.zeros((n, 3))
    for row, (number, tokens) in enumerate(records):
        where = f".node line {number}"
        if len(tokens) < 4:
            raise MeshParseError(f"{where}: node needs an index and 3 coordinates")
        if _int(tokens[0], where) != base + row:
            raise MeshParseError(f"{where}: node index {tokens[0]} out of sequence (expected {base + row})")
        vertices[row] = [_float(t, where) for t in tokens[1:4]]

    header, records = _records(ele_text, ".ele")
    m = _header_count(header, ".ele")
    per_tet = _int(header[1], ".ele header") if len(header) > 1 else 4
    if per_tet not in (4, 10):
        raise MeshParseError(f".ele header: {per_tet} nodes per tet is unsupported")
    if len(records) != m:
        raise MeshParseError(f".ele header declares {m} tets but {len(records)} records follow")

    tets = np.zeros((m, 4), dtype=np.int64)
    for row, (number, tokens) in enumerate(records):
        where = f".ele line {number}"
        if len(tokens) < 1 + per_tet:
            raise MeshParseError(f"{where}: tet needs an index and {per_tet} nodes")
        corners = [_int(t, where) - base for t in tokens[1:5]]
        for corner in corners:
            if not 0 <= corner < n:
                raise MeshParseError(f"{where}: out-of-range node index {corner + base} ({n} nodes, first index {base})")
        tets[row] = corners

    mesh = TetMesh(vertices, tets)
    volumes = mesh.signed_volumes()
    scale = mesh.bbox_diag ** 3
    flat = np.flatnonzero(np.abs(volumes) <= ZERO_VOLUME_TOLERANCE * scale)
    if len(flat):
        raise MeshParseError(f"tet {int(flat[0]) + base} has zero volume ({len(flat)} flat tet(s))")

    inverted = volumes < 0
    if inverted.any():
        logger.debug(f"Reoriented {int(inverted.sum())} negatively oriented tet(s)")
        tets[inverted] = tets[inverted][:, [0, 1, 3, 2]]
        mesh = TetMesh(vertices, tets)
    return mesh


def write_tetgen(mesh: TetMesh) -> Tuple[str, str]:
    """Serialize as 0-based TetGen `.node` and `.ele` text."""
    node = io.StringIO()
    node.write(f"{mesh.vertex_count} 3 0 0\n")
    for i, (x, y, z) in enumerate(mesh.vertices):
        node.write(f"{i} {x:.17g} {y:.17g} {z:.17g}\n")

    ele = io.StringIO()
    ele.write(f"{mesh.tet_count} 4 0\n")
    for i, (a, b, c, d) in enumerate(mesh.tets):
        ele.write(f"{i} {a} {b} {c} {d}\n")
    return node.getvalue(), ele.getvalue()


# ==================== Files ====================
def atomic_write_text(path: Union[str, Path], text: str) -> Path:
    """Write via a temp file in the same directory, then rename over the target."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise
    return path


@contextmanager
def staged_directory(path: Union[str, Path]) -> Iterator[Path]:
    """
    Yield an empty sibling directory that replaces `path` when the block exits
    cleanly. On error the staging directory is removed and `path` is untouched.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    staging = Path(tempfile.mkdtemp(prefix=f".{path.name}.", dir=path.parent))
    staging.chmod(0o755)
    try:
        yield staging
    except BaseException:
        shutil.rmtree(staging, ignore_errors=True)
        raise

    retired = staging.with_name(staging.name + ".old") if path.exists() else None
    try:
        if retired is not None:
            os.rename(path, retired)
        os.rename(staging, path)
    except BaseException:
        if retired is not None and not path.exists():
            os.rename(retired, path)
        shutil.rmtree(staging, ignore_errors=True)
        raise
    if retired is not None:
        shutil.rmtree(retired, ignore_errors=True)
    logger.debug(f"Replaced {path} with staged output")


def read_obj(path: Union[str, Path]) -> SurfaceMesh:
    path = Path(path)
    with path.open("r", encoding="ascii", errors="strict") as f:
        try:
            mesh = parse_obj(f)
        except (MeshParseError, UnicodeDecodeError) as e:
            raise MeshParseError(f"{path}: {e}") from e
    logger.debug(f"Read {path}: {mesh.vertex_count} vertices, {mesh.face_count} faces")
    return mesh


def write_obj_file(path: Union[str, Path], mesh: SurfaceMesh) -> Path:
    return atomic_write_text(path, write_obj(mesh))


def tetgen_paths(path: Union[str, Path]) -> Tuple[Path, Path]:
    """Sibling `.node` / `.ele` paths for a base path or either file."""
    base = Path(path)
    if base.suffix in (".node", ".ele"):
        base = base.with_suffix("")
    return base.with_name(base.name + ".node"), base.with_name(base.name + ".ele")


def read_tetgen(path: Union[str, Path]) -> TetMesh:
    node_path, ele_path = tetgen_paths(path)
    with node_path.open("r", encoding="ascii") as node, ele_path.open("r", encoding="ascii") as ele:
        try:
            mesh = parse_tetgen(node, ele)
        except (MeshParseError, UnicodeDecodeError) as e:
            raise MeshParseError(f"{node_path}: {e}") from e
    logger.debug(f"Read {node_path}: {mesh.vertex_count} nodes, {mesh.tet_count} tets")
    return mesh


def write_tetgen_files(path: Union[str, Path], mesh: TetMesh) -> Tuple[Path, Path]:
    node_path, ele_path = tetgen_paths(path)
    node_text, ele_text = write_tetgen(mesh)
    return atomic_write_text(node_path, node_text), atomic_write_text(ele_path, ele_text)
