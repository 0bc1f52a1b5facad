from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np

from config import Config
from geometry.complexes import (
    GeometricRealization,
    Simplex,
    SimplicialComplex,
    SubdivisionMap,
    VertexId,
    barycentric_subdivide,
    carriers_of_points,
    locate,
    mesh,
    sample_points,
)
from utils.errors import CapacityError, ConsistencyError, LevelError, UnknownElementError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Poset:
    """Opposite face poset P(K)^op

    Elements are the integers 0..N-1 in canonical face order, so the
    maximal points (vertices) come first. y <= x iff face(y) contains face(x).
    """

    complex: SimplicialComplex

    @cached_property
    def faces(self) -> Tuple[Simplex, ...]:
        return self.complex.ordered_faces

    @cached_property
    def element_of(self) -> Dict[Simplex, int]:
        return {face: i for i, face in enumerate(self.faces)}

    @property
    def elements(self) -> range:
        return range(len(self.faces))

    @cached_property
    def maximal_points(self) -> Tuple[int, ...]:
        return tuple(i for i, face in enumerate(self.faces) if face.dim == 0)

    @cached_property
    def minimal_points(self) -> Tuple[int, ...]:
        return tuple(self.element_of[face] for face in self.complex.maximal_faces)

    @cached_property
    def vertices(self) -> Tuple[VertexId, ...]:
        """Vertex ids in the order of maximal_points"""
        return tuple(self.faces[i].vertices[0] for i in self.maximal_points)

    @cached_property
    def vertex_index(self) -> Dict[VertexId, int]:
        return {v: j for j, v in enumerate(self.vertices)}

    @cached_property
    def _cofaces(self) -> Dict[VertexId, List[Simplex]]:
        table: Dict[VertexId, List[Simplex]] = {v: [] for v in self.complex.vertices}
        for top in self.complex.maximal_faces:
            for v in top.vertices:
                table[v].append(top)
        return table

    def face_of(self, x: int) -> Simplex:
        self._check(x)
        return self.faces[x]

    def dim(self, x: int) -> int:
        return self.face_of(x).dim

    def leq(self, y: int, x: int) -> bool:
        return self.face_of(x).issubset(self.face_of(y))

    def up(self, x: int) -> FrozenSet[int]:
        """Elements above x: the faces of face(x)"""
        return frozenset(self.element_of[t] for t in self.face_of(x).faces())

    def _check(self, x):
        if not isinstance(x, (int, np.integer)) or not 0 <= x < len(self.faces):
            raise UnknownElementError(f"Element {x} is not in the poset")

    def __len__(self):
        return len(self.faces)


@dataclass(frozen=True)
class VertexGraph:
    vertices: Tuple[VertexId, ...]
    edges: Tuple[Tuple[int, int], ...]  # oriented index pairs

    @property
    def m(self) -> int:
        return len(self.vertices)

    def adjacency(self) -> np.ndarray:
        A = np.zeros((self.m, self.m), dtype=bool)
        for i, j in self.edges:
            A[i, j] = A[j, i] = True
        return A


@dataclass(frozen=True, eq=False)
class PosetMap:
    source: Poset
    target: Poset
    image: Tuple[int, ...]

    def __call__(self, y: int) -> int:
        return self.image[y]

    def is_monotone(self) -> bool:
        return all(self.target.leq(self.image[a], self.image[b]) for a, b in covers(self.source))

    def is_surjective(self) -> bool:
        return set(self.image) == set(self.target.elements)


@dataclass(frozen=True, eq=False)
class InverseSystem:
    complexes: Tuple[SimplicialComplex, ...]
    realizations: Tuple[GeometricRealization, ...]
    subdivisions: Tuple[SubdivisionMap, ...]
    levels: Tuple[Poset, ...]
    maps: Tuple[PosetMap, ...]  # maps[n] is phi_{n,n+1}: X_{n+1} -> X_n

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    def meshes(self) -> List[float]:
        return [mesh(K, G) for K, G in zip(self.complexes, self.realizations)]

    def check_level(self, n: int):
        if not 0 <= n <= self.depth:
            raise LevelError(f"Level {n} not built (depth {self.depth})")

    def map_between(self, l: int, n: int) -> PosetMap:
        """phi_{l,n}: X_n -> X_l by composing adjacent maps"""
        self.check_level(l)
        self.check_level(n)
        if l > n:
            raise LevelError(f"phi_{{{l},{n}}} needs l <= n")
        result = identity_map(self.levels[n])
        for k in range(n - 1, l - 1, -1):
            result = compose(self.maps[k], result)
        return result

    def direct_map(self, l: int, n: int) -> PosetMap:
        """phi_{l,n} computed geometrically from barycenters at level n"""
        self.check_level(l)
        self.check_level(n)
        K, G = self.complexes[n], self.realizations[n]
        centers = np.array([G.barycenter(face) for face in self.levels[n].faces])
        coarse = carriers_of_points(self.complexes[l], self.realizations[l], centers)
        target = self.levels[l]
        return PosetMap(self.levels[n], target, tuple(target.element_of[c] for c in coarse))


def face_poset_op(K: SimplicialComplex) -> Poset:
    """Poset of faces ordered by reversed inclusion"""
    return Poset(K)


def covers(P: Poset) -> List[Tuple[int, int]]:
    """Hasse diagram pairs (a, b) with a < b"""
    pairs = []
    for a, face in enumerate(P.faces):
        if face.dim == 0:
            continue
        for v in face.vertices:
            facet = Simplex(tuple(u for u in face.vertices if u != v))
            pairs.append((a, P.element_of[facet]))
    return pairs


def basis_open(P: Poset, x: int) -> FrozenSet[int]:
    """U_x = {y : y <= x}, the faces containing face(x)"""
    sigma = P.face_of(x)
    found = set()
    for top in P._cofaces[sigma.vertices[0]]:
        if not sigma.issubset(top):
            continue
        rest = [v for v in top.vertices if v not in sigma]
        for mask in range(1 << len(rest)):
            extra = [rest[k] for k in range(len(rest)) if mask >> k & 1]
            found.add(P.element_of[Simplex.of(list(sigma.vertices) + extra)])
    return frozenset(found)


def open_set_lattice(P: Poset) -> List[FrozenSet[int]]:
    """All down-sets of P (the Alexandrov open sets)"""
    n = len(P)
    if n > Config.OPEN_SET_CAP:
        raise CapacityError(f"Open-set enumeration capped at {Config.OPEN_SET_CAP} elements, got {n}")

    down = [basis_open(P, x) for x in P.elements]
    up = [P.up(x) for x in P.elements]
    family: List[FrozenSet[int]] = []

    def extend(i, inside, outside):
        while i < n and (i in inside or i in outside):
            i += 1
        if i == n:
            family.append(inside)
            return
        extend(i + 1, inside | down[i], outside)
        extend(i + 1, inside, outside | up[i])

    extend(0, frozenset(), frozenset())
    family.sort(key=lambda s: (len(s), sorted(s)))
    logger.debug(f"Enumerated {len(family)} open sets on {n} elements")
    return family


def is_down_set(P: Poset, subset) -> bool:
    subset = set(subset)
    return all(basis_open(P, x) <= subset for x in subset)


def is_topology(family: Sequence[FrozenSet[int]]) -> bool:
    """Closed under pairwise union and intersection, contains the empty set"""
    members = set(family)
    if frozenset() not in members:
        return False
    for a in family:
        for b in family:
            if a | b not in members or a & b not in members:
                return False
    return True


def identity_map(P: Poset) -> PosetMap:
    return PosetMap(P, P, tuple(P.elements))


def compose(outer: PosetMap, inner: PosetMap) -> PosetMap:
    """outer ∘ inner"""
    if inner.target is not outer.source:
        raise LevelError("Maps do not compose: inner target differs from outer source")
    return PosetMap(inner.source, outer.target, tuple(outer.image[y] for y in inner.image))


def induced_poset_map(
    S: SubdivisionMap,
    source: Optional[Poset] = None,
    target: Optional[Poset] = None,
) -> PosetMap:
    """phi(y) = carrier of face(y), from X' onto X"""
    source = source or face_poset_op(S.source)
    target = target or face_poset_op(S.target)
    image = tuple(target.element_of[S.carrier[face]] for face in source.faces)
    phi = PosetMap(source, target, image)

    if not phi.is_monotone():
        raise ConsistencyError("Induced map is not order preserving")
    if not phi.is_surjective():
        raise ConsistencyError("Induced map is not surjective")
    return phi


def build_inverse_system(K: SimplicialComplex, G: GeometricRealization, levels: int) -> InverseSystem:
    """Levels 0..levels of barycentric refinement with induced maps"""
    complexes, realizations, subdivisions = [K], [G], []
    posets = [face_poset_op(K)]
    maps = []
    for n in range(levels):
        fine, fine_G, S = barycentric_subdivide(complexes[-1], realizations[-1])
        if len(fine) > Config.FACE_CAP:
            raise CapacityError(f"Level {n + 1} has {len(fine)} faces (cap {Config.FACE_CAP})")
        fine_P = face_poset_op(fine)
        maps.append(induced_poset_map(S, fine_P, posets[-1]))
        complexes.append(fine)
        realizations.append(fine_G)
        subdivisions.append(S)
        posets.append(fine_P)
        logger.debug(f"Level {n + 1}: {len(fine)} faces")

    return InverseSystem(tuple(complexes), tuple(realizations), tuple(subdivisions), tuple(posets), tuple(maps))


def coherence_violations(system: InverseSystem) -> int:
    """Count elements where composed maps disagree with the geometric carrier map"""
    violations = 0
    for n in range(system.depth + 1):
        if system.map_between(n, n).image != tuple(system.levels[n].elements):
            violations += 1
        for l in range(n + 1):
            direct = system.direct_map(l, n).image
            for m in range(l, n + 1):
                composed = compose(system.map_between(l, m), system.map_between(m, n)).image
                violations += sum(1 for a, b in zip(direct, composed) if a != b)
    return violations


def project_points(points, system: InverseSystem, n: int) -> List[int]:
    """p_n for a batch of points"""
    system.check_level(n)
    P = system.levels[n]
    faces = carriers_of_points(system.complexes[n], system.realizations[n], points)
    return [P.element_of[face] for face in faces]


def project_point(x, system: InverseSystem, n: int) -> int:
    """p_n(x): element of X_n carrying x"""
    return project_points(x, system, n)[0]


def star_identity_check(
    system: InverseSystem,
    n: int,
    x: int,
    samples: Optional[int] = None,
    seed: Optional[int] = None,
) -> bool:
    """p_n^{-1}(U_x) equals the open star of face(x), checked on samples

    Points are projected at the finest built level and pushed down through
    the inverse system maps, so a corrupted map shows up as a mismatch.
    Samples include the barycenter of every face at the finest level.
    """
    system.check_level(n)
    samples = Config.STAR_SAMPLES if samples is None else samples
    seed = Config.RANDOM_SEED if seed is None else seed
    P = system.levels[n]
    sigma = P.face_of(x)

    finest = system.depth
    K_f, G_f = system.complexes[finest], system.realizations[finest]
    points = np.vstack([
        sample_points(K_f, G_f, samples, seed),
        np.array([G_f.barycenter(face) for face in K_f.ordered_faces]),
    ])

    push = system.map_between(n, finest)
    projected = [push(e) for e in project_points(points, system, finest)]
    U = basis_open(P, x)
    in_open = np.array([e in U for e in projected])

    K, G = system.complexes[n], system.realizations[n]
    owner, coords = locate(K, G, points)
    in_star = np.zeros(len(points), dtype=bool)
    for row, (idx, lam) in enumerate(zip(owner, coords)):
        top = K.maximal_faces[idx]
        if not sigma.issubset(top):
            continue
        weight = dict(zip(top.vertices, lam))
        in_star[row] = all(weight[v] > Config.SUPPORT_THRESHOLD for v in sigma.vertices)

    mismatches = int(np.count_nonzero(in_open != in_star))
    if mismatches:
        logger.debug(f"Star identity failed for {sigma} at level {n}: {mismatches} point(s)")
    return mismatches == 0


def vertex_graph(P: Poset) -> VertexGraph:
    """Vertices in poset order plus 1-faces oriented from lower to higher index

    The closing edge of a cycle therefore runs 0 -> m-1 and lands at W[0, m-1]
    in the combinatorial Dirac, not in the lower-left corner that
    circle_triple uses. Reversing one edge keeps the spectral multiset.
    """
    idx = P.vertex_index
    edges = tuple(sorted(
        (idx[face.vertices[0]], idx[face.vertices[1]])
        for face in P.faces if face.dim == 1
    ))
    return VertexGraph(P.vertices, edges)


def poset_to_dict(P: Poset) -> dict:
    return {
        "elements": list(P.elements),
        "covers": [list(pair) for pair in covers(P)],
        "faces": {str(x): list(P.faces[x].vertices) for x in P.elements},
    }
