from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from itertools import product
from typing import Mapping, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import null_space, orth

from calculus.algebra import AlgebraElement, Function, evaluate
from config import Config
from geometry.posets import Poset, VertexGraph, vertex_graph
from utils.errors import (
    AdmissibilityError,
    CapacityError,
    NormalizationError,
    ParityError,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class GradedMatrix:
    """2m x 2m complex matrix split into m x m blocks by the grading"""

    entries: np.ndarray
    m: int

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=complex)
        if entries.shape != (2 * self.m, 2 * self.m):
            raise ValueError(f"Expected a {2 * self.m}x{2 * self.m} matrix, got {entries.shape}")
        object.__setattr__(self, "entries", entries)

    @classmethod
    def zeros(cls, m: int) -> "GradedMatrix":
        return cls(np.zeros((2 * m, 2 * m), dtype=complex), m)

    @classmethod
    def identity(cls, m: int) -> "GradedMatrix":
        return cls(np.eye(2 * m, dtype=complex), m)

    @classmethod
    def grading(cls, m: int) -> "GradedMatrix":
        return cls(np.diag(np.r_[np.ones(m), -np.ones(m)]).astype(complex), m)

    @classmethod
    def from_blocks(cls, top_left, top_right, bottom_left, bottom_right) -> "GradedMatrix":
        return cls(np.block([[top_left, top_right], [bottom_left, bottom_right]]), np.shape(top_left)[0])

    def blocks(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        m, A = self.m, self.entries
        return A[:m, :m], A[:m, m:], A[m:, :m], A[m:, m:]

    def _vanish(self, *parts) -> bool:
        scale = max(1.0, float(np.max(np.abs(self.entries))) if self.entries.size else 1.0)
        return all(np.max(np.abs(p), initial=0.0) <= Config.PARITY_TOLERANCE * scale for p in parts)

    @property
    def is_even(self) -> bool:
        _, tr, bl, _ = self.blocks()
        return self._vanish(tr, bl)

    @property
    def is_odd(self) -> bool:
        tl, _, _, br = self.blocks()
        return self._vanish(tl, br)

    @property
    def parity(self) -> str:
        if self.is_even:
            return "even"
        if self.is_odd:
            return "odd"
        return "mixed"

    @property
    def sign(self) -> int:
        """epsilon: +1 for even, -1 for odd"""
        if self.is_even:
            return 1
        if self.is_odd:
            return -1
        raise ParityError("Graded matrix has mixed parity")

    def even_part(self) -> "GradedMatrix":
        tl, tr, bl, br = self.blocks()
        return GradedMatrix.from_blocks(tl, np.zeros_like(tr), np.zeros_like(bl), br)

    def odd_part(self) -> "GradedMatrix":
        tl, tr, bl, br = self.blocks()
        return GradedMatrix.from_blocks(np.zeros_like(tl), tr, bl, np.zeros_like(br))

    def adjoint(self) -> "GradedMatrix":
        return GradedMatrix(self.entries.conj().T, self.m)

    def is_hermitian(self, tol: float = 1e-12) -> bool:
        return bool(np.allclose(self.entries, self.entries.conj().T, atol=tol, rtol=0))

    def vec(self) -> np.ndarray:
        return self.entries.reshape(-1)

    def __matmul__(self, other: "GradedMatrix") -> "GradedMatrix":
        return GradedMatrix(self.entries @ other.entries, self.m)

    def __add__(self, other: "GradedMatrix") -> "GradedMatrix":
        return GradedMatrix(self.entries + other.entries, self.m)

    def __sub__(self, other: "GradedMatrix") -> "GradedMatrix":
        return GradedMatrix(self.entries - other.entries, self.m)

    def __mul__(self, scalar) -> "GradedMatrix":
        return GradedMatrix(self.entries * scalar, self.m)

    __rmul__ = __mul__

    def __neg__(self) -> "GradedMatrix":
        return GradedMatrix(-self.entries, self.m)


@dataclass(frozen=True, eq=False)
class DiracOperator:
    """D = (i/h) [[0, W], [-W^T, 0]] with W the real weight block D^-"""

    W: np.ndarray
    h: float
    graph: Optional[VertexGraph] = None

    @property
    def m(self) -> int:
        return self.W.shape[0]

    @cached_property
    def assembled(self) -> GradedMatrix:
        Z = np.zeros_like(self.W)
        return GradedMatrix((1j / self.h) * np.block([[Z, self.W], [-self.W.T, Z]]), self.m)

    def weighted_degrees(self) -> np.ndarray:
        A = np.abs(self.W)
        return A.sum(axis=1) + A.sum(axis=0)

    def norm_bound(self) -> float:
        """Finite surrogate of mu_n(D) = O(1/h): ||D|| h <= 2 max weighted degree"""
        return 2.0 * float(self.weighted_degrees().max(initial=0.0))

    def norm(self) -> float:
        return float(np.linalg.norm(self.assembled.entries, 2))


@dataclass(frozen=True, eq=False)
class SpectralTriple:
    poset: Poset
    dirac: DiracOperator
    chart: Optional[np.ndarray] = None  # parameter coordinates of the vertices

    @classmethod
    def from_poset(
        cls,
        P: Poset,
        h: float,
        weights=None,
        chart: Optional[np.ndarray] = None,
        graph: Optional[VertexGraph] = None,
    ) -> "SpectralTriple":
        """Triple over the vertex graph of P"""
        graph = graph or vertex_graph(P)
        return cls(P, dirac_from_graph(graph, h, weights), chart)

    @property
    def m(self) -> int:
        return self.dirac.m

    @property
    def h(self) -> float:
        return self.dirac.h

    @property
    def gamma(self) -> GradedMatrix:
        return GradedMatrix.grading(self.m)

    def element(self, values) -> AlgebraElement:
        return AlgebraElement(values, self.poset)

    def sample(self, f: Function) -> AlgebraElement:
        """Sample f on the chart coordinates"""
        if self.chart is None:
            raise ValueError("Triple has no chart to sample on")
        return AlgebraElement(evaluate(f, self.chart), self.poset)

    def grading_residuals(self) -> Tuple[float, float]:
        """(||gamma^2 - 1||, ||gamma D + D gamma||)"""
        g = self.gamma.entries
        D = self.dirac.assembled.entries
        return (
            float(np.linalg.norm(g @ g - np.eye(2 * self.m))),
            float(np.linalg.norm(g @ D + D @ g)),
        )


@dataclass(frozen=True)
class FormSpace:
    degree: int
    m: int
    basis: Tuple[GradedMatrix, ...]
    junk_basis: Tuple[GradedMatrix, ...]

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def basis_matrix(self) -> np.ndarray:
        """Columns are vec(basis element)"""
        return _columns(self.basis, self.m)

    def junk_matrix(self) -> np.ndarray:
        return _columns(self.junk_basis, self.m)

    def junk_residual(self, b: GradedMatrix) -> float:
        """Distance from b to the junk span"""
        J = self.junk_matrix()
        v = b.vec()
        return float(np.linalg.norm(v - J @ (J.conj().T @ v)))


TripleLike = Union[SpectralTriple, DiracOperator]


def _dirac(D: TripleLike) -> DiracOperator:
    return D.dirac if isinstance(D, SpectralTriple) else D


def _columns(mats: Sequence[GradedMatrix], m: int) -> np.ndarray:
    if not mats:
        return np.zeros((4 * m * m, 0), dtype=complex)
    return np.column_stack([b.vec() for b in mats])


def represent(a) -> GradedMatrix:
    """rho(a) = diag(lambda, lambda)"""
    values = np.asarray(getattr(a, "values", a), dtype=complex).reshape(-1)
    return GradedMatrix(np.diag(np.r_[values, values]), values.shape[0])


def dirac_from_graph(graph: VertexGraph, h: float, weights=None) -> DiracOperator:
    """Admissible Dirac operator; combinatorial (all ones) when weights is None"""
    if not h > 0:
        raise AdmissibilityError(f"Mesh length must be positive, got {h}")
    m = graph.m
    adjacency = graph.adjacency()

    if weights is None:
        W = np.zeros((m, m))
        for i, j in graph.edges:
            W[i, j] = 1.0
    elif isinstance(weights, Mapping):
        W = np.zeros((m, m))
        for (i, j), w in weights.items():
            if not adjacency[i, j]:
                raise AdmissibilityError(f"Weight on non-edge ({i}, {j})")
            W[i, j] = w
    else:
        W = np.asarray(weights)
        if W.shape != (m, m):
            raise AdmissibilityError(f"Weight matrix must be {m}x{m}, got {W.shape}")

    if np.iscomplexobj(W):
        if np.any(np.abs(W.imag) > 0):
            raise AdmissibilityError("Dirac weights must be real")
        W = W.real
    W = np.array(W, dtype=float)

    support = (W != 0) | (W.T != 0)
    stray = support & ~adjacency
    if np.any(stray):
        i, j = np.argwhere(stray)[0]
        raise AdmissibilityError(f"Weight on non-edge ({i}, {j})")
    missing = adjacency & ~support
    if np.any(missing):
        i, j = np.argwhere(missing)[0]
        raise AdmissibilityError(f"Edge ({i}, {j}) has zero weight")

    W.setflags(write=False)
    D = DiracOperator(W, float(h), graph)
    if D.norm() * D.h > D.norm_bound() + 1e-12:
        raise AdmissibilityError("Dirac operator norm exceeds the O(1/h) bound")
    return D


def commutator(D: TripleLike, b: GradedMatrix) -> GradedMatrix:
    """Plain commutator [D, b]"""
    A = _dirac(D).assembled
    return A @ b - b @ A


def graded_d(b: GradedMatrix, D: TripleLike) -> GradedMatrix:
    """d b = D b - epsilon_b b D"""
    A = _dirac(D).assembled
    eps = b.sign
    return A @ b - eps * (b @ A)


def _singular_values(block: np.ndarray) -> np.ndarray:
    return np.linalg.svd(np.asarray(block, dtype=complex), compute_uv=False)


def signed_singular_values(matrix: np.ndarray) -> np.ndarray:
    """+-sqrt(eig(b*b)), signs alternating down the sorted list

    Only meaningful when the singular values come in equal pairs, as they do
    for every [D, rho(a)]; the pairs become the symmetric multiset
    {+s, -s}. Graded matrices go through spectral_values instead.
    """
    s = _singular_values(matrix)
    signs = np.where(np.arange(s.size) % 2 == 0, 1.0, -1.0)
    return np.sort(signs * s)


def spectral_values(b: GradedMatrix) -> np.ndarray:
    """Signed singular values of an odd matrix, ascending

    The H- -> H+ block contributes +s and the H+ -> H- block -s, so the
    multiset is symmetric whenever both blocks share singular values.
    """
    if not b.is_odd:
        raise ParityError("spectral_values needs an odd matrix")
    _, upper, lower, _ = b.blocks()
    return np.sort(np.r_[_singular_values(upper), -_singular_values(lower)])


def inner_product(A: GradedMatrix, B: GradedMatrix) -> complex:
    """(A, B) = Tr(B* A)"""
    return complex(np.vdot(B.entries, A.entries))


def algebra_inner(a, b) -> complex:
    """Inner product of algebra elements through their representations"""
    return inner_product(represent(a), represent(b))


def project_coefficients(B: GradedMatrix) -> np.ndarray:
    """c_j = (B_jj + B_{j+m,j+m}) / 2"""
    diag = np.diag(B.entries)
    return (diag[:B.m] + diag[B.m:]) / 2


def project_onto_algebra(B: GradedMatrix, level: Poset) -> AlgebraElement:
    """Orthogonal projection onto rho(A)"""
    return AlgebraElement(project_coefficients(B), level)


def delta(b: GradedMatrix, triple: SpectralTriple) -> AlgebraElement:
    """Adjoint of d: p[D, b]"""
    return project_onto_algebra(commutator(triple, b), triple.poset)


def laplacian(a: AlgebraElement, triple: SpectralTriple) -> AlgebraElement:
    """Delta(a) = p[D, [D, rho(a)]]"""
    return delta(commutator(triple, represent(a)), triple)


def laplacian_matrix(triple: TripleLike) -> np.ndarray:
    """Matrix of a -> Delta(a): weighted graph Laplacian with weights w^2, over h^2"""
    D = _dirac(triple)
    S = D.W ** 2
    S = S + S.T
    return (np.diag(S.sum(axis=1)) - S) / D.h ** 2


def differential_matrix(triple: TripleLike) -> np.ndarray:
    """Columns vec(d e_j) for the vertex indicators e_j"""
    D = _dirac(triple)
    return np.column_stack([graded_d(represent(e), D).vec() for e in np.eye(D.m)])


def harmonic_basis(triple: TripleLike) -> np.ndarray:
    """Orthonormal basis of ker Delta"""
    L = laplacian_matrix(triple)
    return null_space(L, rcond=Config.SUBSPACE_TOLERANCE)


def kernels_agree(triple: TripleLike) -> bool:
    """ker Delta equals ker d"""
    H = harmonic_basis(triple)
    K = null_space(differential_matrix(triple), rcond=Config.SUBSPACE_TOLERANCE)
    return H.shape[1] == K.shape[1] and subspace_distance(H, K) <= Config.SUBSPACE_TOLERANCE


def hodge_decompose(a: AlgebraElement, triple: SpectralTriple) -> Tuple[AlgebraElement, AlgebraElement]:
    """a = exact + harmonic with harmonic in ker Delta and exact in range delta"""
    H = harmonic_basis(triple).astype(complex)
    harmonic = H @ (H.conj().T @ a.values)
    exact = a.values - harmonic
    return AlgebraElement(exact, a.level), AlgebraElement(harmonic, a.level)


def subspace_distance(A: np.ndarray, B: np.ndarray) -> float:
    """Spectral norm of the difference of orthogonal projectors"""
    if A.shape[1] == 0 and B.shape[1] == 0:
        return 0.0
    PA = A @ A.conj().T
    PB = B @ B.conj().T
    return float(np.linalg.norm(PA - PB, 2))


def _orth(columns: np.ndarray) -> np.ndarray:
    if columns.shape[1] == 0 or not np.any(columns):
        return np.zeros((columns.shape[0], 0), dtype=complex)
    return orth(columns, rcond=Config.SUBSPACE_TOLERANCE)


def _product(mats: Sequence[GradedMatrix], m: int) -> GradedMatrix:
    out = GradedMatrix.identity(m)
    for M in mats:
        out = out @ M
    return out


def omega_basis(p: int, triple: TripleLike, generators: Optional[Sequence] = None) -> FormSpace:
    """Quantized p-forms span{rho(a0) da1 ... dap} with the junk part split off

    Junk in degree p is d applied to universal (p-1)-forms that represent
    zero: sums of a0 da1 ... da_{p-1} vanishing as operators.
    """
    D = _dirac(triple)
    m = D.m
    if p < 0 or p > 2:
        raise CapacityError(f"Forms supported up to degree 2, got {p}")
    if m > Config.FORM_CAP:
        raise CapacityError(f"Form spaces capped at m = {Config.FORM_CAP}, got {m}")

    gens = list(np.eye(m)) if generators is None else [np.asarray(getattr(g, "values", g)) for g in generators]
    rho = [represent(g) for g in gens]
    drho = [graded_d(r, D) for r in rho]

    span = _orth(np.column_stack([
        _product([rho[t[0]]] + [drho[k] for k in t[1:]], m).vec()
        for t in product(range(len(gens)), repeat=p + 1)
    ]))

    junk = np.zeros((4 * m * m, 0), dtype=complex)
    if p >= 1:
        tuples = list(product(range(len(gens)), repeat=p))
        represented = np.column_stack([
            _product([rho[t[0]]] + [drho[k] for k in t[1:]], m).vec() for t in tuples
        ])
        differentiated = np.column_stack([
            _product([drho[k] for k in t], m).vec() for t in tuples
        ])
        zero_reps = null_space(represented, rcond=Config.SUBSPACE_TOLERANCE)
        if zero_reps.shape[1]:
            junk = _orth(differentiated @ zero_reps)

    full = _orth(np.hstack([span, junk]))
    quotient = _orth(full - junk @ (junk.conj().T @ full)) if junk.shape[1] else full

    logger.debug(f"Omega^{p}: span {span.shape[1]}, junk {junk.shape[1]}, quotient {quotient.shape[1]}")
    return FormSpace(
        degree=p,
        m=m,
        basis=tuple(GradedMatrix(c.reshape(2 * m, 2 * m), m) for c in quotient.T),
        junk_basis=tuple(GradedMatrix(c.reshape(2 * m, 2 * m), m) for c in junk.T),
    )


def exact_forms(triple: TripleLike) -> np.ndarray:
    """Orthonormal basis of span{da}, the image d(Omega^0)"""
    return _orth(differential_matrix(triple))


def omega_invariance_check(D1: TripleLike, D2: TripleLike, degree: int = 1) -> bool:
    """Omega^degree spans agree for two admissible operators on one graph"""
    A, B = _dirac(D1), _dirac(D2)
    if A.m != B.m:
        raise AdmissibilityError("Dirac operators act on different vertex sets")
    if not np.array_equal((A.W != 0) | (A.W.T != 0), (B.W != 0) | (B.W.T != 0)):
        raise AdmissibilityError("Dirac operators follow different graphs")
    S1 = omega_basis(degree, A).basis_matrix()
    S2 = omega_basis(degree, B).basis_matrix()
    if S1.shape[1] != S2.shape[1]:
        return False
    return subspace_distance(S1, S2) <= Config.SUBSPACE_TOLERANCE


def graded_trace(x: GradedMatrix) -> complex:
    """Tr_s(x) = Tr(gamma x)"""
    tl, _, _, br = x.blocks()
    return complex(np.trace(tl) - np.trace(br))


def expectation(omega: GradedMatrix, b: GradedMatrix) -> complex:
    """<b>_omega = Tr(gamma omega b) / Tr_s(omega)"""
    ts = graded_trace(omega)
    if abs(ts) <= Config.PARITY_TOLERANCE:
        raise NormalizationError("Density matrix has zero graded trace")
    g_omega = omega.entries.copy()
    g_omega[omega.m:, :] *= -1
    return complex(np.sum(g_omega * b.entries.T)) / ts
