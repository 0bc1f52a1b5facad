import numpy as np
import pytest

from calculus.algebra import AlgebraElement
from calculus.models import circle_triple, line_lattice_triple
from calculus.spectral import (
    GradedMatrix,
    SpectralTriple,
    algebra_inner,
    commutator,
    delta,
    dirac_from_graph,
    exact_forms,
    expectation,
    graded_d,
    graded_trace,
    harmonic_basis,
    hodge_decompose,
    inner_product,
    kernels_agree,
    laplacian,
    laplacian_matrix,
    omega_basis,
    omega_invariance_check,
    project_coefficients,
    represent,
    spectral_values,
)
from geometry.complexes import build_complex
from geometry.posets import face_poset_op, vertex_graph
from utils.errors import AdmissibilityError, CapacityError, NormalizationError, ParityError


def line_multiset(values, h):
    diffs = np.diff(values) / h
    return np.sort(np.r_[diffs, -diffs, 0.0, 0.0])


def circle_multiset(values, h):
    diffs = np.diff(np.r_[values, values[0]]) / h
    return np.sort(np.r_[diffs, -diffs])


def random_odd(rng, m):
    B = rng.normal(size=(2 * m, 2 * m)) + 1j * rng.normal(size=(2 * m, 2 * m))
    return GradedMatrix(B, m).odd_part()


# Graded matrices

def test_grading_is_an_involution():
    g = GradedMatrix.grading(3)
    assert np.allclose((g @ g).entries, np.eye(6))
    assert g.is_even and g.sign == 1


def test_parity_of_blocks():
    Z, I = np.zeros((2, 2)), np.eye(2)
    odd = GradedMatrix.from_blocks(Z, I, I, Z)
    mixed = GradedMatrix.from_blocks(I, I, Z, Z)
    assert odd.parity == "odd" and odd.sign == -1
    assert mixed.parity == "mixed"
    with pytest.raises(ParityError):
        mixed.sign
    assert np.allclose((mixed.even_part() + mixed.odd_part()).entries, mixed.entries)


def test_graded_trace():
    assert graded_trace(GradedMatrix.identity(2)) == 0
    assert graded_trace(GradedMatrix.grading(2)) == 4
    assert graded_trace(GradedMatrix(np.diag([1, 0, 0, 0]), 2)) == 1


# Dirac operators

def test_dirac_is_hermitian_and_odd():
    triple = circle_triple(5)
    D = triple.dirac.assembled
    assert D.is_hermitian()
    assert D.is_odd
    square, anti = triple.grading_residuals()
    assert square == 0
    assert anti <= 1e-14


def test_dirac_rejects_bad_weights():
    graph = vertex_graph(face_poset_op(build_complex([(0, 1), (1, 2)])))
    with pytest.raises(AdmissibilityError):
        dirac_from_graph(graph, 0.0)
    with pytest.raises(AdmissibilityError):
        dirac_from_graph(graph, 1.0, {(0, 2): 1.0})
    with pytest.raises(AdmissibilityError):
        dirac_from_graph(graph, 1.0, {(0, 1): 1.0})
    with pytest.raises(AdmissibilityError):
        dirac_from_graph(graph, 1.0, np.array([[0, 1j, 0], [0, 0, 1], [0, 0, 0]]))


def test_dirac_weights_from_matrix():
    graph = vertex_graph(face_poset_op(build_complex([(0, 1)])))
    D = dirac_from_graph(graph, 0.5, np.array([[0.0, 2.0], [0.0, 0.0]]))
    assert D.norm() == pytest.approx(4.0)
    assert D.norm() * D.h <= D.norm_bound()


def test_differential_on_two_points():
    triple = line_lattice_triple(2, 1.0)
    da = graded_d(represent(triple.element([0, 1])), triple)
    C = np.array([[0, 1], [0, 0]])
    expected = 1j * np.block([[np.zeros((2, 2)), C], [C.T, np.zeros((2, 2))]])
    assert np.allclose(da.entries, expected)
    assert da.is_odd
    assert np.allclose(da.adjoint().entries, -da.entries)


def test_even_differential_is_plain_commutator(rng):
    triple = circle_triple(6)
    b = represent(rng.normal(size=6))
    assert np.allclose(graded_d(b, triple).entries, commutator(triple, b).entries)


def test_differential_of_constant_vanishes():
    triple = circle_triple(4)
    da = graded_d(represent(np.full(4, 2.5)), triple)
    assert np.allclose(da.entries, 0)


# Spectrum

def test_spectrum_on_two_points():
    triple = line_lattice_triple(2, 1.0)
    da = graded_d(represent([0, 1]), triple)
    assert np.allclose(spectral_values(da), [-1, 0, 0, 1])


def test_spectrum_on_three_cycle():
    triple = circle_triple(3, 1.0)
    da = graded_d(represent([0, 1, 3]), triple)
    assert np.allclose(spectral_values(da), [-3, -2, -1, 1, 2, 3])


def test_spectrum_on_line():
    triple = line_lattice_triple(4, 0.5)
    da = graded_d(represent([0, 1, 3, 6]), triple)
    assert np.allclose(spectral_values(da), [-6, -4, -2, 0, 0, 2, 4, 6])


def test_spectrum_keeps_block_signs():
    upper = GradedMatrix(np.block([[np.zeros((2, 2)), np.diag([1.0, 0.0])], [np.zeros((2, 4))]]), 2)
    assert np.allclose(spectral_values(upper), [0, 0, 0, 1])
    both = GradedMatrix(upper.entries + upper.entries.T, 2)
    assert np.allclose(spectral_values(both), [-1, 0, 0, 1])


def test_spectrum_of_one_form():
    triple = line_lattice_triple(2, 1.0)
    form = represent([2, 5]) @ graded_d(represent([0, 1]), triple)
    assert np.allclose(spectral_values(form), [-5, 0, 0, 2])


def test_combinatorial_cycle_orients_closing_edge_upward(cycle_poset):
    triple = SpectralTriple.from_poset(cycle_poset, 1.0)
    assert triple.dirac.W[0, 2] == 1 and triple.dirac.W[2, 0] == 0
    values = [0, 1, 3]
    combinatorial = spectral_values(graded_d(represent(values), triple))
    corner = spectral_values(graded_d(represent(values), circle_triple(3, 1.0)))
    assert np.allclose(combinatorial, corner)
    assert np.allclose(combinatorial, [-3, -2, -1, 1, 2, 3])


def test_spectrum_needs_odd_matrix():
    with pytest.raises(ParityError):
        spectral_values(represent([1, 2]))


def test_line_spectrum_closed_form(rng):
    for _ in range(200):
        m = int(rng.integers(2, 65))
        h = float(10 ** rng.uniform(-3, 0))
        values = rng.normal(size=m)
        da = graded_d(represent(values), line_lattice_triple(m, h))
        assert np.allclose(spectral_values(da), line_multiset(values, h), rtol=0, atol=1e-10 * max(1, 1 / h))
        dense = np.linalg.eigvalsh(1j * da.entries)
        assert np.allclose(dense, spectral_values(da), rtol=0, atol=1e-9 / h)


def test_circle_spectrum_closed_form(rng):
    for _ in range(200):
        m = int(rng.integers(3, 65))
        h = float(10 ** rng.uniform(-3, 0))
        values = rng.normal(size=m)
        da = graded_d(represent(values), circle_triple(m, h))
        assert np.allclose(spectral_values(da), circle_multiset(values, h), rtol=0, atol=1e-10 * max(1, 1 / h))


def test_differentials_commute_on_line(rng):
    triple = line_lattice_triple(8, 0.25)
    for _ in range(20):
        da = graded_d(represent(rng.normal(size=8)), triple)
        db = graded_d(represent(rng.normal(size=8)), triple)
        assert np.max(np.abs((da @ db - db @ da).entries)) <= 1e-12


# Inner products, delta and the Laplacian

def test_norm_of_differential():
    triple = line_lattice_triple(2, 1.0)
    da = graded_d(represent([0, 1]), triple)
    assert inner_product(da, da) == pytest.approx(2)


def test_projection_coefficients():
    assert np.allclose(project_coefficients(GradedMatrix(np.diag([1, 0, 0, 0]), 2)), [0.5, 0])


def test_delta_of_even_element_vanishes(rng):
    triple = circle_triple(5)
    assert np.allclose(delta(represent(rng.normal(size=5)), triple).values, 0)


@pytest.mark.parametrize("m", [2, 4, 8, 16, 32])
def test_adjointness(rng, m):
    triple = line_lattice_triple(m, 1.0 / m)
    for _ in range(100):
        a = triple.element(rng.normal(size=m) + 1j * rng.normal(size=m))
        b = random_odd(rng, m)
        da = graded_d(represent(a), triple)
        lhs = inner_product(b, da)
        rhs = algebra_inner(delta(b, triple), a)
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))


def test_laplacian_examples():
    two = line_lattice_triple(2, 1.0)
    assert np.allclose(laplacian(two.element([0, 1]), two).values, [-1, 1])
    three = line_lattice_triple(3, 1.0)
    assert np.allclose(laplacian(three.element([0, 1, 3]), three).values, [-1, -1, 2])


def test_laplacian_matrix_matches_operator(rng):
    triple = circle_triple(7)
    a = triple.element(rng.normal(size=7))
    assert np.allclose(laplacian(a, triple).values, laplacian_matrix(triple) @ a.values)


@pytest.mark.parametrize("build", [line_lattice_triple, circle_triple])
def test_hodge_suite(rng, build):
    for _ in range(100):
        m = int(rng.integers(3, 33))
        triple = build(m, 1.0 / m)
        a = triple.element(rng.normal(size=m))
        da = graded_d(represent(a), triple)
        energy = inner_product(da, da).real
        positivity = algebra_inner(laplacian(a, triple), a).real
        assert positivity == pytest.approx(energy, rel=1e-10, abs=1e-12)

        assert harmonic_basis(triple).shape[1] == 1
        exact, harmonic = hodge_decompose(a, triple)
        norm2 = np.vdot(a.values, a.values).real
        assert np.linalg.norm(a.values - exact.values - harmonic.values) <= 1e-10
        assert abs(np.vdot(harmonic.values, exact.values)) <= 1e-10 * norm2
        assert np.allclose(harmonic.values, np.mean(a.values))


def test_hodge_on_two_points():
    triple = line_lattice_triple(2, 1.0)
    exact, harmonic = hodge_decompose(triple.element([0, 1]), triple)
    assert np.allclose(harmonic.values, [0.5, 0.5])
    assert np.allclose(exact.values, [-0.5, 0.5])


def test_kernels_agree():
    assert kernels_agree(circle_triple(6))
    assert kernels_agree(line_lattice_triple(5, 0.25))


def test_disconnected_graph_has_two_harmonic_functions():
    P = face_poset_op(build_complex([(0, 1), (2, 3)]))
    triple = SpectralTriple.from_poset(P, 1.0)
    assert harmonic_basis(triple).shape[1] == 2
    assert kernels_agree(triple)


# Forms

def test_forms_on_two_points():
    triple = line_lattice_triple(2, 1.0)
    assert omega_basis(0, triple).dimension == 2
    assert omega_basis(1, triple).dimension == 2
    assert exact_forms(triple).shape[1] == 1


def test_second_differential_is_junk(rng):
    triple = line_lattice_triple(4, 0.5)
    forms = omega_basis(2, triple)
    for _ in range(10):
        dda = graded_d(graded_d(represent(rng.normal(size=4)), triple), triple)
        assert forms.junk_residual(dda) <= 1e-10


def test_form_degree_and_size_caps():
    with pytest.raises(CapacityError):
        omega_basis(3, line_lattice_triple(3, 1.0))
    with pytest.raises(CapacityError):
        omega_basis(1, line_lattice_triple(40, 1.0))


@pytest.mark.parametrize("m", [3, 5, 8])
def test_omega_invariance(rng, m):
    for build, edges in (
        (line_lattice_triple, [(k, k + 1) for k in range(m - 1)]),
        (circle_triple, [(k, (k + 1) % m) for k in range(m)]),
    ):
        base = build(m, 1.0)
        weights = {e: float(rng.choice([-1, 1]) * rng.uniform(0.2, 2.0)) for e in edges}
        graph = base.dirac.graph
        other = dirac_from_graph(graph, 1.0, weights)
        assert omega_invariance_check(base, other)


def test_omega_invariance_needs_same_graph():
    line = line_lattice_triple(4, 1.0)
    cycle = circle_triple(4, 1.0)
    with pytest.raises(AdmissibilityError):
        omega_invariance_check(line, cycle)


# Expectations

def test_expectation_of_zero():
    omega = GradedMatrix(np.diag([1, 0, 0, 0]), 2)
    assert expectation(omega, GradedMatrix.zeros(2)) == 0


def test_expectation_of_constant_differential():
    triple = line_lattice_triple(3, 1.0)
    omega = GradedMatrix(np.diag([1, 0, 0, 0, 0, 0]), 3)
    da = graded_d(represent(np.full(3, 4.0)), triple)
    assert expectation(omega, da) == pytest.approx(0)


def test_expectation_needs_graded_trace():
    with pytest.raises(NormalizationError):
        expectation(GradedMatrix.identity(2), GradedMatrix.zeros(2))
    triple = line_lattice_triple(3, 1.0)
    db = graded_d(represent([0, 1, 3]), triple)
    with pytest.raises(NormalizationError):
        expectation(db, db)


def test_constants_are_harmonic():
    triple = circle_triple(6)
    c = AlgebraElement.constant(2.0, triple.poset)
    assert np.allclose(laplacian(c, triple).values, 0)
    assert np.allclose(harmonic_basis(triple)[:, 0] ** 2, 1 / 6)
