from __future__ import annotations

import json
import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations, permutations
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial.distance import pdist

from config import Config
from utils.errors import BuildError, GeometryError, OutsideComplexError

logger = logging.getLogger(__name__)

VertexId = int


@dataclass(frozen=True)
class Simplex:
    vertices: Tuple[VertexId, ...]

    def __post_init__(self):
        if not self.vertices:
            raise BuildError("Simplex needs at least one vertex")
        if any(b <= a for a, b in zip(self.vertices, self.vertices[1:])):
            raise BuildError(f"Simplex vertices must be strictly increasing: {self.vertices}")

    @classmethod
    def of(cls, ids: Iterable[VertexId]) -> "Simplex":
        """Build a simplex from vertex ids in any order"""
        try:
            ids = [int(v) for v in ids]
        except (TypeError, ValueError):
            raise BuildError(f"Vertex ids must be integers, got {ids!r}")
        if len(set(ids)) != len(ids):
            raise BuildError(f"Duplicate vertex in {ids}")
        return cls(tuple(sorted(ids)))

    @property
    def dim(self) -> int:
        return len(self.vertices) - 1

    def faces(self) -> Iterator["Simplex"]:
        """All nonempty faces, including the simplex itself"""
        for k in range(1, len(self.vertices) + 1):
            for sub in combinations(self.vertices, k):
                yield Simplex(sub)

    def issubset(self, other: "Simplex") -> bool:
        return set(self.vertices) <= set(other.vertices)

    def sort_key(self) -> Tuple[int, Tuple[VertexId, ...]]:
        return (self.dim, self.vertices)

    def __len__(self):
        return len(self.vertices)

    def __iter__(self):
        return iter(self.vertices)

    def __contains__(self, vertex):
        return vertex in self.vertices

    def __repr__(self):
        return "{" + ",".join(str(v) for v in self.vertices) + "}"


@dataclass(frozen=True)
class SimplicialComplex:
    faces: frozenset
    maximal_faces: Tuple[Simplex, ...]

    @cached_property
    def ordered_faces(self) -> Tuple[Simplex, ...]:
        """Faces sorted by (dimension, vertices); the canonical element order"""
        return tuple(sorted(self.faces, key=Simplex.sort_key))

    @cached_property
    def vertices(self) -> Tuple[VertexId, ...]:
        return tuple(sorted(f.vertices[0] for f in self.faces if f.dim == 0))

    @property
    def dimension(self) -> int:
        return max(f.dim for f in self.maximal_faces)

    def faces_of_dim(self, k: int) -> List[Simplex]:
        return [f for f in self.ordered_faces if f.dim == k]

    def __len__(self):
        return len(self.faces)


@dataclass(frozen=True, eq=False)
class GeometricRealization:
    ids: Tuple[VertexId, ...]
    points: np.ndarray

    @classmethod
    def from_mapping(cls, coordinates: Mapping[VertexId, Sequence[float]]) -> "GeometricRealization":
        """Build from a vertex-id → point mapping"""
        ids = tuple(sorted(coordinates))
        try:
            points = np.array([np.atleast_1d(np.asarray(coordinates[v], dtype=float)) for v in ids])
        except (TypeError, ValueError):
            raise BuildError("Vertex coordinates must be numbers sharing one ambient dimension")
        if points.ndim != 2:
            raise BuildError("All vertex coordinates must share one ambient dimension")
        points.setflags(write=False)
        return cls(ids, points)

    @cached_property
    def index(self) -> Dict[VertexId, int]:
        return {v: i for i, v in enumerate(self.ids)}

    @property
    def ambient_dim(self) -> int:
        return self.points.shape[1]

    def __getitem__(self, vertex: VertexId) -> np.ndarray:
        return self.points[self.index[vertex]]

    def points_of(self, simplex: Simplex) -> np.ndarray:
        return self.points[[self.index[v] for v in simplex.vertices]]

    def barycenter(self, simplex: Simplex) -> np.ndarray:
        return self.points_of(simplex).mean(axis=0)


@dataclass(frozen=True, eq=False)
class SubdivisionMap:
    source: SimplicialComplex  # the refinement K'
    target: SimplicialComplex  # the coarse complex K
    carrier: Mapping[Simplex, Simplex]
    vertex_face: Mapping[VertexId, Simplex] = field(default_factory=dict)

    def __call__(self, face: Simplex) -> Simplex:
        return self.carrier[face]


def build_complex(maximal: Iterable[Iterable[VertexId]]) -> SimplicialComplex:
    """Downward closure of a list of simplices"""
    simplices = {s if isinstance(s, Simplex) else Simplex.of(s) for s in maximal}
    if not simplices:
        raise BuildError("Cannot build a complex from an empty list of simplices")

    by_vertex = defaultdict(list)
    for s in simplices:
        for v in s.vertices:
            by_vertex[v].append(s)
    top = [
        s for s in simplices
        if not any(len(t) > len(s) and s.issubset(t) for t in by_vertex[s.vertices[0]])
    ]
    faces = set()
    for s in top:
        faces.update(s.faces())

    logger.debug(f"Built complex with {len(faces)} faces, {len(top)} maximal")
    return SimplicialComplex(frozenset(faces), tuple(sorted(top, key=Simplex.sort_key)))


def check_realization(K: SimplicialComplex, G: GeometricRealization):
    """Raise if G does not realize K"""
    missing = [v for v in K.vertices if v not in G.index]
    if missing:
        raise BuildError(f"No coordinates for vertices {missing[:5]}")

    for face in K.maximal_faces:
        if face.dim == 0:
            continue
        pts = G.points_of(face)
        edges = pts[1:] - pts[0]
        singular = np.linalg.svd(edges, compute_uv=False)
        if singular.size < face.dim or singular[-1] <= Config.AFFINE_TOLERANCE:
            raise GeometryError(f"Vertices of face {face} are affinely dependent")


def barycentric_subdivide(
    K: SimplicialComplex,
    G: GeometricRealization,
) -> Tuple[SimplicialComplex, GeometricRealization, SubdivisionMap]:
    """Barycentric subdivision with carriers back into K"""
    check_realization(K, G)

    # Old vertices keep their id; every higher face gets the next free id in
    # canonical face order, so the labelling is replayable.
    next_id = max(K.vertices) + 1
    vertex_face: Dict[VertexId, Simplex] = {}
    face_vertex: Dict[Simplex, VertexId] = {}
    coordinates: Dict[VertexId, np.ndarray] = {}
    for face in K.ordered_faces:
        if face.dim == 0:
            vid = face.vertices[0]
        else:
            vid = next_id
            next_id += 1
        vertex_face[vid] = face
        face_vertex[face] = vid
        coordinates[vid] = G.barycenter(face)

    chains = []
    for top in K.maximal_faces:
        for order in permutations(top.vertices):
            flag = [Simplex.of(order[:k + 1]) for k in range(len(order))]
            chains.append(Simplex.of(face_vertex[f] for f in flag))

    fine = build_complex(chains)
    carrier = {
        face: max((vertex_face[v] for v in face.vertices), key=lambda s: s.dim)
        for face in fine.faces
    }

    logger.debug(f"Subdivided {len(K)} faces into {len(fine)} faces")
    return (
        fine,
        GeometricRealization.from_mapping(coordinates),
        SubdivisionMap(source=fine, target=K, carrier=carrier, vertex_face=vertex_face),
    )


def mesh(K: SimplicialComplex, G: GeometricRealization) -> float:
    """Largest face diameter"""
    largest = 0.0
    for face in K.maximal_faces:
        if face.dim == 0:
            continue
        largest = max(largest, float(pdist(G.points_of(face)).max()))
    return largest


def as_points(points, ambient_dim: int) -> np.ndarray:
    """Normalise a point or a batch of points to shape (N, ambient_dim)"""
    X = np.asarray(points, dtype=float)
    if X.ndim == 0:
        return X.reshape(1, 1)
    if X.ndim == 1:
        return X.reshape(-1, 1) if ambient_dim == 1 else X.reshape(1, -1)
    return X


@dataclass(frozen=True, eq=False)
class _Frame:
    face: Simplex
    origin: np.ndarray
    edges: np.ndarray
    inverse: np.ndarray


def _frames(K: SimplicialComplex, G: GeometricRealization) -> List[_Frame]:
    frames = []
    for face in K.maximal_faces:
        pts = G.points_of(face)
        edges = pts[1:] - pts[0]
        inverse = np.linalg.pinv(edges.T) if face.dim > 0 else np.zeros((0, G.ambient_dim))
        frames.append(_Frame(face, pts[0], edges, inverse))
    return frames


def locate(
    K: SimplicialComplex,
    G: GeometricRealization,
    points: np.ndarray,
    tol: Optional[float] = None,
) -> Tuple[np.ndarray, List[Optional[np.ndarray]]]:
    """Containing maximal face index and barycentric coordinates per point

    Index -1 marks points outside |K|. The first maximal face (in canonical
    order) that contains a point wins.
    """
    tol = Config.SUPPORT_THRESHOLD if tol is None else tol
    X = as_points(points, G.ambient_dim)

    owner = np.full(len(X), -1, dtype=int)
    coords: List[Optional[np.ndarray]] = [None] * len(X)

    for idx, frame in enumerate(_frames(K, G)):
        todo = np.flatnonzero(owner < 0)
        if todo.size == 0:
            break
        rel = X[todo] - frame.origin
        T = rel @ frame.inverse.T
        residual = np.linalg.norm(T @ frame.edges - rel, axis=1)
        lam = np.hstack([1.0 - T.sum(axis=1, keepdims=True), T])
        inside = (residual <= tol) & np.all(lam >= -tol, axis=1)
        for row, hit in zip(todo[inside], lam[inside]):
            owner[row] = idx
            coords[row] = hit

    return owner, coords


def carriers_of_points(K: SimplicialComplex, G: GeometricRealization, points: np.ndarray) -> List[Simplex]:
    """Batch version of carrier_of_point"""
    owner, coords = locate(K, G, points)
    outside = np.flatnonzero(owner < 0)
    if outside.size:
        raise OutsideComplexError(f"{outside.size} point(s) lie outside the complex")

    result = []
    for idx, lam in zip(owner, coords):
        face = K.maximal_faces[idx]
        support = [v for v, w in zip(face.vertices, lam) if w > Config.SUPPORT_THRESHOLD]
        result.append(Simplex(tuple(support)))
    return result


def carrier_of_point(x, K: SimplicialComplex, G: GeometricRealization) -> Simplex:
    """Unique face whose relative interior contains x"""
    return carriers_of_points(K, G, as_points(x, G.ambient_dim))[0]


def sample_points(K: SimplicialComplex, G: GeometricRealization, count: int, seed: int = 0) -> np.ndarray:
    """Random points inside randomly chosen maximal faces"""
    rng = np.random.default_rng(seed)
    choice = rng.integers(len(K.maximal_faces), size=count)
    out = np.empty((count, G.ambient_dim))
    for row, idx in enumerate(choice):
        pts = G.points_of(K.maximal_faces[idx])
        weights = rng.dirichlet(np.ones(len(pts)))
        out[row] = weights @ pts
    return out


def face_grid(face: Simplex, G: GeometricRealization, resolution: int) -> Tuple[np.ndarray, np.ndarray]:
    """Barycentric lattice of a face with `resolution` steps per dimension"""
    k = face.dim
    if k == 0:
        lam = np.ones((1, 1))
    else:
        lam = np.array(list(_compositions(resolution, k + 1)), dtype=float) / resolution
    return lam, lam @ G.points_of(face)


def _compositions(total: int, parts: int) -> Iterator[Tuple[int, ...]]:
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


# Builders

def path_complex(m: int, h: float = 1.0, start: float = 0.0) -> Tuple[SimplicialComplex, GeometricRealization]:
    """Path on m vertices placed at start + j*h"""
    K = build_complex([(j, j + 1) for j in range(m - 1)])
    G = GeometricRealization.from_mapping({j: [start + j * h] for j in range(m)})
    return K, G


def interval_complex(a: float = 0.0, b: float = 1.0) -> Tuple[SimplicialComplex, GeometricRealization]:
    """Single edge realizing [a, b]"""
    return path_complex(2, b - a, a)


def cycle_complex(m: int) -> SimplicialComplex:
    """Cycle on m vertices, combinatorially a triangulated circle"""
    return build_complex([(j, (j + 1) % m) for j in range(m)])


def polygon_complex(m: int, radius: float = 1.0) -> Tuple[SimplicialComplex, GeometricRealization]:
    """Regular m-gon inscribed in the circle of given radius"""
    angles = 2 * math.pi * np.arange(m) / m
    G = GeometricRealization.from_mapping(
        {j: [radius * math.cos(t), radius * math.sin(t)] for j, t in enumerate(angles)}
    )
    return cycle_complex(m), G


def simplex_complex(n: int) -> Tuple[SimplicialComplex, GeometricRealization]:
    """Standard n-simplex: origin plus unit vectors"""
    coords = {0: np.zeros(n)}
    for j in range(1, n + 1):
        coords[j] = np.eye(n)[j - 1]
    return build_complex([tuple(range(n + 1))]), GeometricRealization.from_mapping(coords)


# JSON I/O

def load_complex(path) -> Tuple[SimplicialComplex, GeometricRealization]:
    """Read {"vertices": [[...]], "maximal": [[...]]}"""
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise BuildError(f"Cannot read complex from {path}: {e}")
    return complex_from_dict(data)


def complex_from_dict(data: Mapping) -> Tuple[SimplicialComplex, GeometricRealization]:
    try:
        vertices = data["vertices"]
        maximal = data["maximal"]
    except (KeyError, TypeError):
        raise BuildError('Complex JSON needs "vertices" and "maximal"')
    K = build_complex(maximal)
    G = GeometricRealization.from_mapping({j: p for j, p in enumerate(vertices)})
    check_realization(K, G)
    return K, G


def complex_to_dict(K: SimplicialComplex, G: GeometricRealization) -> dict:
    """Relabel vertices 0..n-1 in id order"""
    relabel = {v: j for j, v in enumerate(K.vertices)}
    return {
        "vertices": [G[v].tolist() for v in K.vertices],
        "maximal": [[relabel[v] for v in face.vertices] for face in K.maximal_faces],
    }


def dump_complex(K: SimplicialComplex, G: GeometricRealization, path):
    Path(path).write_text(json.dumps(complex_to_dict(K, G)), encoding="utf-8")
