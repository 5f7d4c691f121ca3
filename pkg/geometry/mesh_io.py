import logging
from pathlib import Path

import numpy as np

from geometry.interface import extract_interface
from geometry.validation import validate_mesh
from geometry.views import DomainDecomposition, InterfaceGraph, Mesh, MeshFormatError

logger = logging.getLogger(__name__)

HEADER = "acmsmesh 1"


def save_mesh(mesh: Mesh, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    decomp = mesh.decomposition
    lines = [HEADER, f"nodes {mesh.num_nodes}"]
    lines += [f"{x:.17g} {y:.17g}" for x, y in mesh.nodes]
    lines.append(f"triangles {mesh.num_triangles}")
    lines += [
        f"{a} {b} {c} {mat} {sub}"
        for (a, b, c), mat, sub in zip(mesh.triangles, mesh.materials, mesh.subdomains)
    ]
    lines.append(f"bsegments {len(mesh.bsegments)}")
    lines += [f"{a} {b} {marker}" for (a, b), marker in zip(mesh.bsegments, mesh.bmarkers)]
    lines.append(f"decomp {decomp.jx} {decomp.jy} {decomp.cells_per_subdomain}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    logger.debug("wrote mesh with %d triangles to %s", mesh.num_triangles, path)
    return path


class _Reader:
    def __init__(self, text: str):
        self.lines = [(k + 1, line.strip()) for k, line in enumerate(text.splitlines()) if line.strip()]
        self.pos = 0

    def next(self, what: str) -> tuple[int, list[str]]:
        if self.pos >= len(self.lines):
            raise MeshFormatError(f"unexpected end of file while reading {what}",
                                  entity=self.lines[-1][0] + 1 if self.lines else 1)
        number, line = self.lines[self.pos]
        self.pos += 1
        return number, line.split()

    def section(self, keyword: str) -> int:
        number, words = self.next(f"'{keyword}' header")
        if len(words) != 2 or words[0] != keyword:
            raise MeshFormatError(f"line {number}: expected '{keyword} <count>'", entity=number)
        return self.parse(int, words[1], number)

    def rows(self, count: int, width: int, kinds, what: str) -> list[list]:
        out = []
        for _ in range(count):
            number, words = self.next(what)
            if len(words) != width:
                raise MeshFormatError(f"line {number}: {what} needs {width} fields, got {len(words)}", entity=number)
            out.append([self.parse(kind, word, number) for kind, word in zip(kinds, words)])
        return out

    @staticmethod
    def parse(kind, word: str, number: int):
        try:
            return kind(word)
        except ValueError:
            raise MeshFormatError(f"line {number}: cannot read '{word}' as {kind.__name__}", entity=number) from None


def load_mesh(path: str | Path) -> tuple[Mesh, InterfaceGraph]:
    """Read the ASCII mesh format, validate it and extract the interface graph."""
    reader = _Reader(Path(path).read_text(encoding="utf-8"))
    number, words = reader.next("header")
    if " ".join(words) != HEADER:
        raise MeshFormatError(f"line {number}: expected header '{HEADER}'", entity=number)

    nodes = reader.rows(reader.section("nodes"), 2, (float, float), "node")
    triangles = reader.rows(reader.section("triangles"), 5, (int,) * 5, "triangle")
    segments = reader.rows(reader.section("bsegments"), 3, (int,) * 3, "boundary segment")
    number, words = reader.next("decomp line")
    if len(words) != 4 or words[0] != "decomp":
        raise MeshFormatError(f"line {number}: expected 'decomp jx jy cells'", entity=number)
    jx, jy, cells = (reader.parse(int, w, number) for w in words[1:])
    if min(jx, jy, cells) < 1:
        raise MeshFormatError(f"line {number}: decomp counts must be positive, got {jx} {jy} {cells}", entity=number)
    if not nodes or not triangles:
        raise MeshFormatError("mesh file holds no nodes or no triangles", entity=1)

    nodes = np.array(nodes, dtype=float).reshape(-1, 2)
    tri = np.array(triangles, dtype=np.int64).reshape(-1, 5)
    seg = np.array(segments, dtype=np.int64).reshape(-1, 3)
    lower = nodes.min(axis=0)
    side = (nodes[:, 0].max() - lower[0]) / (jx * cells)
    decomp = DomainDecomposition(jx, jy, cells, float(side), (float(lower[0]), float(lower[1])))
    mesh = Mesh(
        nodes=nodes,
        triangles=tri[:, :3].copy(),
        materials=tri[:, 3].copy(),
        subdomains=tri[:, 4].copy(),
        bsegments=seg[:, :2].copy(),
        bmarkers=seg[:, 2].copy(),
        decomposition=decomp,
    )
    validate_mesh(mesh)
    return mesh, extract_interface(mesh)
