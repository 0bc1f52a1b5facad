from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from functools import cached_property, reduce
from typing import Callable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from calculus.algebra import Function, evaluate
from calculus.spectral import (
    DiracOperator,
    SpectralTriple,
    graded_d,
    represent,
    signed_singular_values,
)
from config import Config
from geometry.complexes import cycle_complex, path_complex
from geometry.posets import face_poset_op
from utils.errors import CapacityError, MetricError, SizeError
from utils.expression import parse_expression

logger = logging.getLogger(__name__)

MAX_DIMENSION = 3


def line_lattice_triple(m: int, h: float, start: float = 0.0) -> SpectralTriple:
    """Path graph with the upper shift as D^-"""
    if m < 2:
        raise SizeError(f"Line lattice needs m >= 2, got {m}")
    if not h > 0:
        raise SizeError(f"Spacing must be positive, got {h}")
    K, G = path_complex(m, h, start)
    P = face_poset_op(K)
    chart = np.array([G[v] for v in P.vertices])
    return SpectralTriple.from_poset(P, h, chart=chart)


def circle_triple(m: int, h: Optional[float] = None) -> SpectralTriple:
    """Cycle graph with edges k -> k+1 mod m; the wrap edge sits in the corner W[m-1, 0]"""
    if m < 3:
        raise SizeError(f"Circle needs m >= 3, got {m}")
    h = 2 * math.pi / m if h is None else h
    if not h > 0:
        raise SizeError(f"Spacing must be positive, got {h}")
    P = face_poset_op(cycle_complex(m))
    weights = {(k, (k + 1) % m): 1.0 for k in range(m)}
    chart = (np.arange(m) * h).reshape(-1, 1)
    return SpectralTriple.from_poset(P, h, weights=weights, chart=chart)


@dataclass(frozen=True)
class DimSpec:
    m: int
    h: float
    periodic: bool = False

    @classmethod
    def from_dict(cls, data: Mapping) -> "DimSpec":
        try:
            m = int(data["m"])
        except (KeyError, TypeError, ValueError):
            raise SizeError('Every lattice direction needs an integer "m"')
        if m < 1:
            raise SizeError(f"Lattice direction needs m >= 1, got {m}")
        periodic = bool(data.get("periodic", False))
        default_h = 2 * math.pi / m if periodic else 1.0 / max(m - 1, 1)
        try:
            h = float(data.get("h", default_h))
        except (TypeError, ValueError):
            raise SizeError(f"Lattice spacing must be a number, got {data.get('h')!r}")
        return cls(m, h, periodic)

    def triple(self) -> SpectralTriple:
        if self.periodic:
            return circle_triple(self.m, self.h)
        return line_lattice_triple(self.m, self.h)


@dataclass(frozen=True)
class LatticeSpec:
    dims: Tuple[DimSpec, ...]
    metric_weights: Optional[Tuple[Function, ...]] = None

    @classmethod
    def from_dict(cls, data: Mapping) -> "LatticeSpec":
        """{"dims": [{"m", "h", "periodic"}...], "weights": [expr, ...]}"""
        dims = tuple(DimSpec.from_dict(d) for d in data.get("dims", []))
        weights = data.get("weights")
        if weights is not None:
            if len(weights) != len(dims):
                raise MetricError(f"Expected {len(dims)} weight expressions, got {len(weights)}")
            weights = tuple(parse_expression(str(w)) for w in weights)
        return cls(dims, weights)

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(d.m for d in self.dims)


@dataclass(frozen=True, eq=False)
class TensorTriple:
    """Kronecker-sum Dirac over a product lattice

    Hilbert index of factor k runs over 2*m_k (two copies of the vertices);
    the algebra acts diagonally through the grid value at (i_1 mod m_1, ...).
    """

    factors: Tuple[SpectralTriple, ...]
    weights: Optional[Tuple[np.ndarray, ...]] = None  # grid-shaped, one per direction
    chart: Optional[np.ndarray] = None

    @cached_property
    def D_assembled(self) -> np.ndarray:
        """Dense Kronecker-sum Dirac; capped at Config.TENSOR_CAP rows"""
        total = self.total_dim
        if total > Config.TENSOR_CAP:
            raise CapacityError(f"Tensor dimension {total} exceeds cap {Config.TENSOR_CAP}")
        D = np.zeros((total, total), dtype=complex)
        for k in range(self.d):
            term = _kron_term(self.factors, k)
            if self.weights is not None:
                _apply_direction_weight(term, k, self.shape, self.weights[k])
            D += term
        logger.debug(f"Assembled tensor Dirac of dimension {total} over grid {self.shape}")
        return D

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(t.m for t in self.factors)

    @property
    def d(self) -> int:
        return len(self.factors)

    @property
    def total_dim(self) -> int:
        return int(np.prod([2 * t.m for t in self.factors]))

    def gamma_diagonal(self) -> np.ndarray:
        """Diagonal of gamma (x) ... (x) gamma"""
        return reduce(np.kron, [np.r_[np.ones(t.m), -np.ones(t.m)] for t in self.factors])

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return bool(np.allclose(self.D_assembled, self.D_assembled.conj().T, atol=tol, rtol=0))

    def is_odd(self, tol: float = 1e-12) -> bool:
        g = self.gamma_diagonal()
        return bool(np.max(np.abs(self.D_assembled * (g[:, None] + g[None, :])), initial=0.0) <= tol)

    def represent(self, grid_values) -> np.ndarray:
        """rho(a) for grid-shaped values"""
        a = np.asarray(grid_values, dtype=complex).reshape(self.shape)
        index = [np.arange(2 * m) % m for m in self.shape]
        return np.diag(a[np.ix_(*index)].reshape(-1))

    def commutator(self, b: np.ndarray) -> np.ndarray:
        return self.D_assembled @ b - b @ self.D_assembled

    def commutator_formula(self, parts: Sequence[np.ndarray]) -> np.ndarray:
        """sum_k b_1 (x) ... (x) [D_k, b_k] (x) ... (x) b_d for b = b_1 (x) ... (x) b_d"""
        if self.weights is not None:
            raise ValueError("Tensor commutator formula holds for unweighted products only")
        terms = []
        for k, factor in enumerate(self.factors):
            D_k = factor.dirac.assembled.entries
            bracket = D_k @ parts[k] - parts[k] @ D_k
            terms.append(reduce(np.kron, [bracket if j == k else parts[j] for j in range(self.d)]))
        return sum(terms)

    def spectral_values(self, grid_values) -> np.ndarray:
        """Signed singular values of [D, rho(a)] from the dense matrix"""
        return signed_singular_values(self.commutator(self.represent(grid_values)))

    def directional_spectral_values(self, k: int, grid_values) -> np.ndarray:
        """Spectral values of [weighted 1 (x) D_k (x) 1, rho(a)], one grid line at a time

        The operator is block diagonal over the lines in direction k, and each
        line appears 2^(d-1) times, once per copy in the other factors.
        """
        a = np.asarray(grid_values, dtype=complex).reshape(self.shape)
        factor = self.factors[k]
        W, h = factor.dirac.W, factor.h
        lines = np.moveaxis(a, k, -1).reshape(-1, self.shape[k])
        line_weights = None
        if self.weights is not None:
            line_weights = np.moveaxis(self.weights[k], k, -1).reshape(-1, self.shape[k])

        values = []
        for row, line in enumerate(lines):
            W_line = W if line_weights is None else line_weights[row][:, None] * W
            D_line = DiracOperator(W_line, h)
            values.append(signed_singular_values(graded_d(represent(line), D_line).entries))
        repeat = 2 ** (self.d - 1)
        return np.sort(np.tile(np.concatenate(values), repeat))


def _kron_term(factors: Sequence[SpectralTriple], k: int) -> np.ndarray:
    mats = [
        t.dirac.assembled.entries if j == k else np.eye(2 * t.m)
        for j, t in enumerate(factors)
    ]
    return np.array(reduce(np.kron, mats), dtype=complex)


def _apply_direction_weight(term: np.ndarray, k: int, shape: Tuple[int, ...], w: np.ndarray):
    """Scale nonzero entries by w at the grid point of their + side index in direction k"""
    rows, cols = np.nonzero(term)
    doubled = tuple(2 * m for m in shape)
    R = np.array(np.unravel_index(rows, doubled))
    C = np.array(np.unravel_index(cols, doubled))
    point = R % np.array(shape)[:, None]
    point[k] = np.minimum(R[k], C[k])
    term[rows, cols] *= w[tuple(point)]


def tensor_triple(
    factors: Sequence[SpectralTriple],
    weights: Optional[Sequence[np.ndarray]] = None,
    chart: Optional[np.ndarray] = None,
    assemble: bool = True,
) -> TensorTriple:
    """D = sum_k 1 (x) ... (x) D^(k) (x) ... (x) 1, optionally metric weighted

    With assemble=False the dense matrix is only built on first use, which
    lets line-by-line computations run on grids past the dense cap.
    """
    factors = tuple(factors)
    if not factors:
        raise SizeError("Tensor triple needs at least one factor")
    if len(factors) > MAX_DIMENSION:
        raise CapacityError(f"Tensor triples supported up to dimension {MAX_DIMENSION}")
    shape = tuple(t.m for t in factors)
    stored = None if weights is None else tuple(np.asarray(w, dtype=float).reshape(shape) for w in weights)
    triple = TensorTriple(factors, stored, chart)
    if assemble:
        triple.D_assembled
    return triple


def grid_coordinates(spec: LatticeSpec) -> np.ndarray:
    """Parameter coordinates j*h_k of the product grid, rows in C order"""
    axes = [np.arange(d.m) * d.h for d in spec.dims]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([g.reshape(-1) for g in mesh])


def sample_grid(f: Function, spec: LatticeSpec) -> np.ndarray:
    return evaluate(f, grid_coordinates(spec)).reshape(spec.shape)


def metric_weighted_dirac(spec: LatticeSpec, assemble: bool = True) -> TensorTriple:
    """Tensor Dirac with direction k scaled by its inverse-metric weight"""
    factors = [d.triple() for d in spec.dims]
    chart = grid_coordinates(spec)
    if spec.metric_weights is None:
        return tensor_triple(factors, chart=chart, assemble=assemble)

    weights = []
    for k, g in enumerate(spec.metric_weights):
        w = np.asarray(g(chart))
        w = np.broadcast_to(w, (chart.shape[0],))
        if np.iscomplexobj(w) and np.any(np.abs(np.imag(w)) > 0):
            raise MetricError(f"Metric weight {k} is not real")
        w = np.real(w).astype(float)
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise MetricError(f"Metric weight {k} must be strictly positive on the grid")
        weights.append(w.reshape(spec.shape))
    return tensor_triple(factors, weights=weights, chart=chart, assemble=assemble)


def torus_weights(R: float = 2.0, r: float = 1.0) -> Tuple[Callable, Callable]:
    """Inverse-metric weights of the embedded torus, phi being the second coordinate"""
    if not (R > r > 0):
        raise MetricError(f"Torus radii need R > r > 0, got R={R}, r={r}")

    def g11(X):
        return 1.0 / (R + r * np.cos(np.asarray(X)[:, 1]))

    def g22(X):
        return np.full(len(X), 1.0 / r ** 2)

    return g11, g22


def torus_spec(m: int, R: float = 2.0, r: float = 1.0) -> LatticeSpec:
    """Periodic m x m lattice carrying the torus weights"""
    h = 2 * math.pi / m
    return LatticeSpec((DimSpec(m, h, True), DimSpec(m, h, True)), torus_weights(R, r))


def elementary(parts: Sequence[np.ndarray]) -> np.ndarray:
    return reduce(np.kron, parts)


def dirac_entries(triple: TensorTriple) -> List[Tuple[int, int, complex]]:
    """Nonzero entries (row, col, value) of the assembled Dirac"""
    rows, cols = np.nonzero(triple.D_assembled)
    return [(int(r), int(c), complex(triple.D_assembled[r, c])) for r, c in zip(rows, cols)]
