"""Refinement driver and error tables for the convergence experiments.

Every experiment evaluates one level at a time: a level builds its own
triple, measures a single error and returns an ErrorRow. Levels are
independent, so they run through the LevelRunner and are reduced in level
order.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from calculus.algebra import Function, evaluate, sample, sup_distance
from calculus.models import (
    DimSpec,
    LatticeSpec,
    TensorTriple,
    circle_triple,
    grid_coordinates,
    line_lattice_triple,
    metric_weighted_dirac,
    sample_grid,
    torus_weights,
)
from calculus.spectral import (
    GradedMatrix,
    SpectralTriple,
    expectation,
    graded_d,
    laplacian_matrix,
    represent,
    spectral_values,
)
from config import Config
from geometry.complexes import GeometricRealization, SimplicialComplex
from geometry.posets import InverseSystem, build_inverse_system, coherence_violations
from utils.errors import ConsistencyError, RateError, SynthesisError, UsageError
from utils.helpers import write_csv
from utils.level_runner import run_levels

logger = logging.getLogger(__name__)

EXACT_TOLERANCE = 1e-10
COHERENCE_FACE_LIMIT = 20000  # full pairwise coherence check below this many faces
MODELS = ("line", "circle")
LATTICE_MODELS = ("lattice2d", "torus2d")


@dataclass(frozen=True)
class ErrorRow:
    level: int
    h: float
    error: float


@dataclass(frozen=True)
class ErrorTable:
    rows: Tuple[ErrorRow, ...]
    kind: str = "derivative"
    model: str = ""

    def __post_init__(self):
        hs = [r.h for r in self.rows]
        if any(b >= a for a, b in zip(hs, hs[1:])):
            raise ValueError("Mesh sizes must strictly decrease across rows")
        if any(r.error < 0 for r in self.rows):
            raise ValueError("Errors must be nonnegative")

    @property
    def rate(self) -> float:
        return estimate_rate(self.rows)

    @property
    def max_error(self) -> float:
        return max((r.error for r in self.rows), default=0.0)

    def cumulative_rates(self) -> List[Optional[float]]:
        """Rate fitted on rows 0..i, None until two usable rows exist"""
        out = []
        for i in range(len(self.rows)):
            try:
                out.append(estimate_rate(self.rows[:i + 1]))
            except RateError:
                out.append(None)
        return out

    def csv_rows(self) -> List[tuple]:
        return [(r.level, r.h, r.error, rate) for r, rate in zip(self.rows, self.cumulative_rates())]

    def plot_rows(self) -> List[tuple]:
        return [(r.h, r.error) for r in self.rows]

    def to_csv(self, path: str) -> str:
        return write_csv(path, ("level", "h", "error", "rate_cum"), self.csv_rows())

    def summary(self, window: Optional[Tuple[float, float]] = None) -> dict:
        """{rate, passed}; tables within EXACT_TOLERANCE pass whatever their rate"""
        window = window or Config.RATE_WINDOWS.get(self.kind)
        try:
            rate = self.rate
        except RateError:
            rate = None
        if self.max_error <= EXACT_TOLERANCE:
            passed = True
        elif rate is None:
            passed = False
        elif window is None:
            passed = True
        elif self.kind == "approximation":
            # lower bound: smooth functions converge faster than Lipschitz ones
            passed = rate >= window[0] - window[1]
        else:
            passed = abs(rate - window[0]) <= window[1]
        return {"rate": rate, "passed": bool(passed), "kind": self.kind,
                "model": self.model, "max_error": self.max_error}


def estimate_rate(rows: Sequence) -> float:
    """Least-squares slope of log(error) against log(h)"""
    pairs = [(r.h, r.error) if isinstance(r, ErrorRow) else tuple(r) for r in rows]
    usable = [(h, e) for h, e in pairs if e > Config.RATE_FLOOR]
    if len(usable) < 2:
        raise RateError(f"Need two rows with error above {Config.RATE_FLOOR}, got {len(usable)}")
    h, e = np.array(usable, dtype=float).T
    slope, _ = np.polyfit(np.log(h), np.log(e), 1)
    return float(slope)


def refine_sequence(K: SimplicialComplex, G: GeometricRealization, levels: int) -> InverseSystem:
    """levels barycentric subdivisions with coherence-checked maps"""
    logger.info(f"🔄 Refining {len(K)} faces through {levels} level(s)")
    system = build_inverse_system(K, G, levels)
    total = sum(len(P) for P in system.levels)
    if total <= COHERENCE_FACE_LIMIT:
        violations = coherence_violations(system)
        if violations:
            raise ConsistencyError(f"{violations} coherence violation(s) in the inverse system")
    else:
        logger.info(f"Skipping pairwise coherence check for {total} faces")
    logger.info(f"✅ Built {system.depth + 1} level(s), finest has {len(system.levels[-1])} faces")
    return system


# Level grids

def level_triple(model: str, k: int, base: Optional[int] = None) -> SpectralTriple:
    """circle: m = base*2^k on [0, 2pi); line: m = base*2^k + 1 on [0, 1]"""
    base = base or Config.BASE_POINTS
    if model == "circle":
        return circle_triple(base * 2 ** k)
    if model == "line":
        m = base * 2 ** k + 1
        return line_lattice_triple(m, 1.0 / (m - 1))
    raise UsageError(f"Unknown model {model!r}; expected one of {MODELS}")


def _matched_error(values: np.ndarray, reference: np.ndarray) -> float:
    """Bottleneck distance between two equal-size real multisets"""
    return float(np.max(np.abs(np.sort(values) - np.sort(reference)), initial=0.0))


def positive_half(values: np.ndarray) -> np.ndarray:
    """The larger half of a symmetric spectrum"""
    s = np.sort(np.real(values))[::-1]
    return s[: s.size // 2]


def derivative_error(triple: SpectralTriple, model: str, f: Function, df: Function) -> float:
    a = triple.sample(f)
    values = positive_half(spectral_values(graded_d(represent(a), triple)))
    slopes = np.abs(evaluate(df, triple.chart))
    if model == "line":
        # forward differences sit on nodes 0..m-2; the kernel adds one zero
        reference = np.r_[slopes[:-1], 0.0]
    else:
        reference = slopes
    return _matched_error(values, reference)


def laplacian_error(triple: SpectralTriple, model: str, f: Function, d2f: Function) -> float:
    a = triple.sample(f)
    values = laplacian_matrix(triple) @ a.values
    reference = -evaluate(d2f, triple.chart)
    if model == "line":
        # one-sided boundary rows are not second differences
        values, reference = values[1:-1], reference[1:-1]
    return float(np.max(np.abs(values - reference), initial=0.0))


def _run_table(
    kind: str,
    model: str,
    levels: int,
    measure: Callable[[SpectralTriple], float],
    base: Optional[int] = None,
) -> ErrorTable:
    def level(k: int) -> ErrorRow:
        triple = level_triple(model, k, base)
        error = measure(triple)
        logger.debug(f"{kind} {model} level {k}: m={triple.m} error={error:.3e}")
        return ErrorRow(k, triple.h, error)

    rows = run_levels(level, range(levels + 1), label=f"{kind} on {model}")
    return ErrorTable(tuple(rows), kind, model)


def derivative_convergence(
    f: Function,
    df: Optional[Function] = None,
    model: str = "circle",
    levels: int = 5,
    base: Optional[int] = None,
) -> ErrorTable:
    """Positive spectral values of da against |f'| on the grid, k = 0..levels"""
    df = df or f.diff("x")
    return _run_table("derivative", model, levels, lambda t: derivative_error(t, model, f, df), base)


def laplacian_convergence(
    f: Function,
    d2f: Optional[Function] = None,
    model: str = "circle",
    levels: int = 5,
    base: Optional[int] = None,
) -> ErrorTable:
    """Delta(sample f) against -f'' at periodic or interior nodes"""
    d2f = d2f or f.diff("x").diff("x")
    return _run_table("laplacian", model, levels, lambda t: laplacian_error(t, model, f, d2f), base)


def approximation_convergence(f: Function, system: InverseSystem, resolution: Optional[int] = None) -> ErrorTable:
    """sup |f - prolong_pl(sample f)| at every level of the system"""
    meshes = system.meshes()

    def level(n: int) -> ErrorRow:
        P, G = system.levels[n], system.realizations[n]
        error = sup_distance(f, sample(f, P, G), G, resolution)
        return ErrorRow(n, meshes[n], error)

    rows = run_levels(level, range(system.depth + 1), label="approximation")
    return ErrorTable(tuple(rows), "approximation", "complex")


def _neighbour(triple: SpectralTriple, j: int, offset: int) -> Optional[int]:
    m = triple.m
    n = j + offset
    periodic = bool(triple.dirac.W[m - 1, 0] or triple.dirac.W[0, m - 1]) if m > 2 else False
    if periodic:
        n %= m
    if not 0 <= n < m:
        return None
    if triple.dirac.W[j, n] == 0 and triple.dirac.W[n, j] == 0:
        return None
    return n


def stencil_synthesis(target: Sequence[Tuple[int, float]], j: int, triple: SpectralTriple) -> GradedMatrix:
    """Density matrix whose expectation of da is a convex mix of one-sided differences at j

    Offsets are +1 (forward) and -1 (backward). The even part diag(e_j, 0)
    fixes Tr_s = 1; the odd part picks the edge terms of da.
    """
    m = triple.m
    if not 0 <= j < m:
        raise SynthesisError(f"Node {j} outside 0..{m - 1}")
    if not target:
        raise SynthesisError("Empty stencil")
    weights = np.array([w for _, w in target], dtype=float)
    if np.any(weights < -1e-15) or abs(weights.sum() - 1.0) > 1e-12:
        raise SynthesisError("Stencil weights must be nonnegative and sum to 1")

    W = triple.dirac.W
    X = np.zeros((m, m), dtype=complex)
    for offset, mu in target:
        if offset not in (1, -1):
            raise SynthesisError(f"Only two-point stencils are available, got offset {offset}")
        n = _neighbour(triple, j, offset)
        if n is None:
            if mu == 0:
                continue
            raise SynthesisError(f"No edge from node {j} with offset {offset}")
        sign = 1.0 if offset > 0 else -1.0
        if W[j, n] != 0:
            X[j, n] += sign * mu / W[j, n]
        else:
            X[n, j] += -sign * mu / W[n, j]

    E = np.zeros((m, m), dtype=complex)
    E[j, j] = 1.0
    Z = np.zeros((m, m), dtype=complex)
    return GradedMatrix.from_blocks(E, X, Z, Z)


def central_difference_error(triple: SpectralTriple, f: Function, df: Function) -> float:
    da = graded_d(represent(triple.sample(f)), triple)
    central = [(1, 0.5), (-1, 0.5)]
    values = np.array([
        (-1j * expectation(stencil_synthesis(central, j, triple), da)).real
        for j in range(triple.m)
    ])
    return float(np.max(np.abs(values - evaluate(df, triple.chart).real)))


def central_difference_convergence(
    f: Function,
    df: Optional[Function] = None,
    levels: int = 5,
    base: Optional[int] = None,
) -> ErrorTable:
    """Synthesized central differences on the circle against f'"""
    df = df or f.diff("x")
    return _run_table("stencil", "circle", levels, lambda t: central_difference_error(t, f, df), base)


def hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    """Hausdorff distance between finite subsets of the line"""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    gaps = np.abs(a[:, None] - b[None, :])
    return float(max(gaps.min(axis=1).max(initial=0.0), gaps.min(axis=0).max(initial=0.0)))


def pooled_spectrum_distances(
    f: Function,
    df: Optional[Function] = None,
    levels: int = 5,
    base: Optional[int] = None,
) -> ErrorTable:
    """Hausdorff distance between pooled spectra and pooled |f'| samples, N = 0..levels"""
    df = df or f.diff("x")

    def level(k: int) -> Tuple[float, np.ndarray, np.ndarray]:
        triple = level_triple("circle", k, base)
        a = triple.sample(f)
        values = positive_half(spectral_values(graded_d(represent(a), triple)))
        return triple.h, values, np.abs(evaluate(df, triple.chart))

    results = run_levels(level, range(levels + 1), label="pooled spectra")
    rows = []
    pooled_values, pooled_slopes = [], []
    for k, (h, values, slopes) in enumerate(results):
        pooled_values.append(values)
        pooled_slopes.append(slopes)
        distance = hausdorff(np.concatenate(pooled_values), np.concatenate(pooled_slopes))
        rows.append(ErrorRow(k, h, distance))
    return ErrorTable(tuple(rows), "pooled", "circle")


# Product lattices

def lattice_spec(model: str, k: int, base: Optional[int] = None) -> LatticeSpec:
    """lattice2d: (base*2^k + 1)^2 grid on [0, 1]^2; torus2d: (base*2^k)^2 periodic with torus weights"""
    base = base or Config.BASE_POINTS
    if model == "lattice2d":
        m = base * 2 ** k + 1
        dim = DimSpec(m, 1.0 / (m - 1), False)
        return LatticeSpec((dim, dim))
    if model == "torus2d":
        m = base * 2 ** k
        dim = DimSpec(m, 2 * math.pi / m, True)
        return LatticeSpec((dim, dim), torus_weights())
    raise UsageError(f"Unknown lattice model {model!r}; expected one of {LATTICE_MODELS}")


def lattice_error(triple: TensorTriple, spec: LatticeSpec, f: Function, gradient: Sequence[Function]) -> float:
    """Worst direction of the matched directional spectra against |w_k d_k f|"""
    a = sample_grid(f, spec)
    coords = grid_coordinates(spec)
    worst = 0.0
    for k, dk in enumerate(gradient):
        values = positive_half(triple.directional_spectral_values(k, a))
        slopes = np.abs(evaluate(dk, coords)).reshape(spec.shape)
        if triple.weights is not None:
            slopes = slopes * triple.weights[k]
        lines = np.moveaxis(slopes, k, -1).reshape(-1, spec.shape[k])
        if not spec.dims[k].periodic:
            lines = np.hstack([lines[:, :-1], np.zeros((lines.shape[0], 1))])
        reference = np.tile(lines.reshape(-1), 2 ** (triple.d - 1))
        worst = max(worst, _matched_error(values, reference))
    return worst


def lattice_convergence(
    f: Function,
    gradient: Optional[Sequence[Function]] = None,
    model: str = "torus2d",
    levels: int = 3,
    base: Optional[int] = None,
) -> ErrorTable:
    """2-d derivative convergence from directional spectral values"""
    gradient = gradient or f.gradient(2)

    def level(k: int) -> ErrorRow:
        spec = lattice_spec(model, k, base)
        triple = metric_weighted_dirac(spec, assemble=False)
        return ErrorRow(k, spec.dims[0].h, lattice_error(triple, spec, f, gradient))

    rows = run_levels(level, range(levels + 1), label=f"derivative on {model}")
    return ErrorTable(tuple(rows), "derivative", model)
