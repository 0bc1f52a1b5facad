from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Dict, Optional

import numpy as np

from config import Config
from geometry.complexes import GeometricRealization, as_points, face_grid, locate
from geometry.posets import PosetMap, Poset
from utils.errors import EvaluationError, LevelError, OutsideComplexError

logger = logging.getLogger(__name__)

# Closed-form functions take an (N, d) coordinate array and return N values.
Function = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class AlgebraElement:
    """Element of the commutative algebra: one complex value per vertex"""

    values: np.ndarray
    level: Poset

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex).reshape(-1)
        if values.shape[0] != len(self.level.maximal_points):
            raise LevelError(
                f"Expected {len(self.level.maximal_points)} values, got {values.shape[0]}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def constant(cls, c: complex, level: Poset) -> "AlgebraElement":
        return cls(np.full(len(level.maximal_points), c, dtype=complex), level)

    @property
    def m(self) -> int:
        return self.values.shape[0]

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values))) if self.m else 0.0

    def conj(self) -> "AlgebraElement":
        return AlgebraElement(np.conj(self.values), self.level)

    def as_dict(self) -> Dict[int, complex]:
        return dict(zip(self.level.vertices, self.values.tolist()))

    def _same_level(self, other: "AlgebraElement"):
        if other.level is not self.level:
            raise LevelError("Algebra elements live on different posets")

    def __add__(self, other):
        if isinstance(other, AlgebraElement):
            self._same_level(other)
            return AlgebraElement(self.values + other.values, self.level)
        return AlgebraElement(self.values + other, self.level)

    def __sub__(self, other):
        if isinstance(other, AlgebraElement):
            self._same_level(other)
            return AlgebraElement(self.values - other.values, self.level)
        return AlgebraElement(self.values - other, self.level)

    def __mul__(self, other):
        if isinstance(other, AlgebraElement):
            self._same_level(other)
            return AlgebraElement(self.values * other.values, self.level)
        return AlgebraElement(self.values * other, self.level)

    __rmul__ = __mul__

    def __neg__(self):
        return AlgebraElement(-self.values, self.level)


@dataclass(frozen=True, eq=False)
class VectorElement:
    """Vector in H(X): one amplitude per poset element"""

    amplitudes: np.ndarray
    level: Poset

    def __post_init__(self):
        amplitudes = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amplitudes.shape[0] != len(self.level):
            raise LevelError(f"Expected {len(self.level)} amplitudes, got {amplitudes.shape[0]}")
        amplitudes.setflags(write=False)
        object.__setattr__(self, "amplitudes", amplitudes)

    @classmethod
    def basis(cls, x: int, level: Poset, amplitude: complex = 1.0) -> "VectorElement":
        vec = np.zeros(len(level), dtype=complex)
        vec[x] = amplitude
        return cls(vec, level)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def vertex_coordinates(P: Poset, G: GeometricRealization) -> np.ndarray:
    return np.array([G[v] for v in P.vertices])


def evaluate(f: Function, X: np.ndarray) -> np.ndarray:
    """Evaluate f on coordinate rows, rejecting non-finite results"""
    try:
        with np.errstate(all="ignore"):
            values = np.asarray(f(X), dtype=complex)
    except (ArithmeticError, ValueError, TypeError) as e:
        raise EvaluationError(f"Function evaluation failed: {e}")
    values = np.broadcast_to(values, (len(X),)).copy()
    if not np.all(np.isfinite(values)):
        bad = int(np.count_nonzero(~np.isfinite(values)))
        raise EvaluationError(f"Function undefined at {bad} point(s)")
    return values


def sample(f: Function, P: Poset, G: GeometricRealization) -> AlgebraElement:
    """values(v) = f(coords(v)) for each vertex"""
    return AlgebraElement(evaluate(f, vertex_coordinates(P, G)), P)


def pullback(phi: PosetMap, a: AlgebraElement) -> AlgebraElement:
    """phi*(a): a_{phi(y)} where dimensions match, 0 otherwise"""
    if a.level is not phi.target:
        raise LevelError("Pullback needs an element of the map's target poset")
    coarse, fine = phi.target, phi.source
    coarse_index = {x: j for j, x in enumerate(coarse.maximal_points)}
    values = np.zeros(len(fine.maximal_points), dtype=complex)
    for j, y in enumerate(fine.maximal_points):
        x = phi(y)
        if coarse.dim(x) == 0:
            values[j] = a.values[coarse_index[x]]
    return AlgebraElement(values, fine)


def hilbert_prolong(phi: PosetMap, xi: VectorElement) -> VectorElement:
    """psi(xi)_y = xi_{phi(y)} where dimensions match, 0 otherwise"""
    if xi.level is not phi.target:
        raise LevelError("Prolongation needs a vector on the map's target poset")
    coarse, fine = phi.target, phi.source
    out = np.zeros(len(fine), dtype=complex)
    for y in fine.elements:
        x = phi(y)
        if fine.dim(y) == coarse.dim(x):
            out[y] = xi.amplitudes[x]
    return VectorElement(out, fine)


def prolong_pl(a: AlgebraElement, G: GeometricRealization) -> Function:
    """Piecewise-linear interpolation of the vertex values over |K|"""
    P = a.level
    K = P.complex
    values = {v: a.values[j] for j, v in enumerate(P.vertices)}

    def f(points):
        X = as_points(points, G.ambient_dim)
        owner, coords = locate(K, G, X)
        if np.any(owner < 0):
            raise OutsideComplexError("Cannot prolong outside the complex")
        out = np.empty(len(X), dtype=complex)
        for row, (idx, lam) in enumerate(zip(owner, coords)):
            face = K.maximal_faces[idx]
            out[row] = sum(w * values[v] for v, w in zip(face.vertices, lam))
        return out

    return f


def sup_distance(
    f: Function,
    a: AlgebraElement,
    G: GeometricRealization,
    resolution: Optional[int] = None,
) -> float:
    """max |f - prolong_pl(a)| over a barycentric grid on every maximal face"""
    resolution = Config.SAMPLES_PER_FACE if resolution is None else resolution
    P = a.level
    values = {v: a.values[j] for j, v in enumerate(P.vertices)}
    worst = 0.0
    for face in P.complex.maximal_faces:
        lam, X = face_grid(face, G, resolution)
        interpolant = lam @ np.array([values[v] for v in face.vertices])
        worst = max(worst, float(np.max(np.abs(evaluate(f, X) - interpolant))))
    return worst


def restrict_to_vertices(xi: VectorElement) -> VectorElement:
    """Zero every amplitude off the maximal points"""
    out = np.zeros(len(xi.level), dtype=complex)
    idx = list(xi.level.maximal_points)
    out[idx] = xi.amplitudes[idx]
    return VectorElement(out, xi.level)
