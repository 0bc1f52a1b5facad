import dataclasses
from itertools import combinations

import numpy as np
import pytest

from geometry.complexes import (
    Simplex,
    barycentric_subdivide,
    build_complex,
    polygon_complex,
    sample_points,
)
from geometry.posets import (
    PosetMap,
    basis_open,
    build_inverse_system,
    coherence_violations,
    covers,
    face_poset_op,
    induced_poset_map,
    is_down_set,
    is_topology,
    open_set_lattice,
    poset_to_dict,
    project_point,
    project_points,
    star_identity_check,
    vertex_graph,
)
from utils.errors import CapacityError, LevelError, UnknownElementError


def brute_force_down_sets(P):
    found = []
    for k in range(len(P) + 1):
        for subset in combinations(P.elements, k):
            if is_down_set(P, subset):
                found.append(frozenset(subset))
    return found


def test_edge_poset():
    P = face_poset_op(build_complex([(0, 1)]))
    assert len(P) == 3
    assert len(P.maximal_points) == 2
    assert len(P.minimal_points) == 1


def test_triangle_poset(triangle):
    P = face_poset_op(triangle[0])
    assert len(P) == 7
    assert len(P.maximal_points) == 3


def test_cycle_poset(cycle_poset):
    assert len(cycle_poset) == 6
    assert len(cycle_poset.maximal_points) == 3
    assert len(cycle_poset.minimal_points) == 3


def test_order_is_reverse_inclusion(cycle_poset):
    P = cycle_poset
    v = P.element_of[Simplex((0,))]
    e = P.element_of[Simplex((0, 1))]
    assert P.leq(e, v)
    assert not P.leq(v, e)


def test_covers_are_codimension_one(triangle):
    P = face_poset_op(triangle[0])
    pairs = covers(P)
    assert len(pairs) == 9  # 3 edges x 2 vertices + triangle x 3 edges
    assert all(P.dim(a) == P.dim(b) + 1 for a, b in pairs)


def test_basis_open_of_top_simplex(triangle):
    P = face_poset_op(triangle[0])
    top = P.minimal_points[0]
    assert basis_open(P, top) == {top}


def test_basis_open_of_cycle_vertex(cycle_poset):
    P = cycle_poset
    v = P.element_of[Simplex((1,))]
    expected = {v, P.element_of[Simplex((0, 1))], P.element_of[Simplex((1, 2))]}
    assert basis_open(P, v) == expected


def test_basis_open_is_reflexive(triangle):
    P = face_poset_op(triangle[0])
    assert all(x in basis_open(P, x) for x in P.elements)


def test_antichain_has_full_power_set():
    P = face_poset_op(build_complex([(0,), (1,)]))
    assert len(open_set_lattice(P)) == 4


def test_cycle_open_sets_match_brute_force(cycle_poset):
    family = open_set_lattice(cycle_poset)
    assert len(family) == 18
    assert set(family) == set(brute_force_down_sets(cycle_poset))


@pytest.mark.parametrize("maximal", [
    [(0, 1)],
    [(0, 1, 2)],
    [(0, 1), (1, 2), (0, 2)],
    [(0, 1, 2), (1, 2, 3)],
    [(0, 1), (1, 2), (2, 3), (3, 4)],
])
def test_open_sets_form_a_topology(maximal):
    P = face_poset_op(build_complex(maximal))
    family = open_set_lattice(P)
    assert is_topology(family)
    assert set(family) == set(brute_force_down_sets(P))
    for x in P.elements:
        assert basis_open(P, x) in family


def test_open_set_cap():
    K, _ = polygon_complex(40)
    with pytest.raises(CapacityError):
        open_set_lattice(face_poset_op(K))


def test_unknown_element(cycle_poset):
    with pytest.raises(UnknownElementError):
        cycle_poset.face_of(99)
    with pytest.raises(LookupError):
        cycle_poset.dim(-1)


def test_induced_map_on_interval(unit_interval):
    K, G = unit_interval
    fine, _, S = barycentric_subdivide(K, G)
    phi = induced_poset_map(S)
    P_fine, P = phi.source, phi.target
    assert phi(P_fine.element_of[Simplex((0,))]) == P.element_of[Simplex((0,))]
    assert phi(P_fine.element_of[Simplex((2,))]) == P.element_of[Simplex((0, 1))]
    assert phi(P_fine.element_of[Simplex((0, 2))]) == P.element_of[Simplex((0, 1))]
    assert phi.is_monotone() and phi.is_surjective()


def test_projection_on_interval(unit_interval):
    system = build_inverse_system(*unit_interval, levels=1)
    P = system.levels[1]
    assert P.face_of(project_point(0.25, system, 1)) == Simplex((0, 2))
    assert P.face_of(project_point(0.5, system, 1)) == Simplex((2,))


def test_inverse_system_meshes(unit_interval):
    system = build_inverse_system(*unit_interval, levels=3)
    assert system.meshes() == pytest.approx([1.0, 0.5, 0.25, 0.125])


def test_zero_levels(unit_interval):
    system = build_inverse_system(*unit_interval, levels=0)
    assert system.depth == 0
    assert system.maps == ()


def test_maps_compose(unit_interval):
    system = build_inverse_system(*unit_interval, levels=3)
    identity = system.map_between(2, 2)
    assert identity.image == tuple(system.levels[2].elements)
    phi = system.map_between(0, 3)
    assert phi.source is system.levels[3]
    assert phi.target is system.levels[0]
    with pytest.raises(LevelError):
        system.map_between(3, 1)
    with pytest.raises(LevelError):
        system.map_between(0, 7)


@pytest.mark.parametrize("levels", [1, 2, 3])
def test_coherence_on_interval(unit_interval, levels):
    system = build_inverse_system(*unit_interval, levels=levels)
    assert coherence_violations(system) == 0


def test_coherence_on_triangle(triangle):
    system = build_inverse_system(*triangle, levels=2)
    assert coherence_violations(system) == 0


def test_star_identity_on_interval(unit_interval):
    system = build_inverse_system(*unit_interval, levels=3)
    for n in range(system.depth + 1):
        for x in system.levels[n].elements:
            assert star_identity_check(system, n, x)


def test_star_identity_on_circle(circle3):
    system = build_inverse_system(*circle3, levels=3)
    for n in (0, 2, 3):
        P = system.levels[n]
        for x in list(P.maximal_points[:3]) + list(P.minimal_points[:3]):
            assert star_identity_check(system, n, x)


def test_corrupted_map_fails_star_identity(unit_interval):
    system = build_inverse_system(*unit_interval, levels=2)
    fine, coarse = system.levels[2], system.levels[1]
    collapsed = PosetMap(fine, coarse, tuple(0 for _ in fine.elements))
    broken = dataclasses.replace(system, maps=(system.maps[0], collapsed))
    assert not star_identity_check(broken, 1, 0)


def test_vertex_graph_of_cycle(cycle_poset):
    graph = vertex_graph(cycle_poset)
    assert graph.m == 3
    assert graph.edges == ((0, 1), (0, 2), (1, 2))
    assert np.array_equal(graph.adjacency(), ~np.eye(3, dtype=bool))


def test_poset_export(cycle_poset):
    data = poset_to_dict(cycle_poset)
    assert data["elements"] == list(range(6))
    assert len(data["covers"]) == 6
    assert data["faces"]["3"] == [0, 1]


@pytest.mark.parametrize("fixture, levels", [
    ("unit_interval", 4),
    ("circle3", 4),
    ("triangle", 3),
])
def test_projections_commute_with_maps(request, fixture, levels):
    K, G = request.getfixturevalue(fixture)
    system = build_inverse_system(K, G, levels=levels)
    points = sample_points(K, G, 1000, seed=5)
    projected = [project_points(points, system, n) for n in range(levels + 1)]
    violations = 0
    for n in range(1, levels + 1):
        for l in range(n):
            phi = system.map_between(l, n)
            violations += sum(phi(y) != x for y, x in zip(projected[n], projected[l]))
    assert violations == 0
