import math

import numpy as np
import pytest

from geometry.complexes import (
    GeometricRealization,
    Simplex,
    barycentric_subdivide,
    build_complex,
    carrier_of_point,
    check_realization,
    complex_from_dict,
    dump_complex,
    face_grid,
    load_complex,
    locate,
    mesh,
    path_complex,
    sample_points,
    simplex_complex,
)
from utils.errors import BuildError, GeometryError, OutsideComplexError


def test_closure_of_one_edge():
    K = build_complex([(0, 1)])
    assert set(K.faces) == {Simplex((0,)), Simplex((1,)), Simplex((0, 1))}


def test_closure_of_one_triangle():
    K = build_complex([(0, 1, 2)])
    assert len(K) == 7
    assert len(K.faces_of_dim(0)) == 3
    assert len(K.faces_of_dim(1)) == 3


def test_three_cycle_has_only_edges():
    K = build_complex([(0, 1), (1, 2), (0, 2)])
    assert len(K) == 6
    assert len(K.maximal_faces) == 3
    assert K.dimension == 1


def test_non_maximal_input_is_absorbed():
    K = build_complex([(0, 1, 2), (0, 1)])
    assert K.maximal_faces == (Simplex((0, 1, 2)),)


def test_empty_input_rejected():
    with pytest.raises(BuildError):
        build_complex([])


def test_duplicate_vertex_rejected():
    with pytest.raises(BuildError):
        Simplex.of([1, 1])


def test_subdivide_interval(unit_interval):
    K, G = unit_interval
    fine, fine_G, S = barycentric_subdivide(K, G)
    assert len(fine.vertices) == 3
    assert len(fine.faces_of_dim(1)) == 2
    assert sorted(fine_G.points[:, 0].tolist()) == [0.0, 0.5, 1.0]
    # the midpoint is the barycenter of the coarse edge
    assert S.vertex_face[2] == Simplex((0, 1))
    assert S(Simplex((0, 2))) == Simplex((0, 1))
    assert S(Simplex((0,))) == Simplex((0,))


def test_subdivide_triangle(triangle):
    K, G = triangle
    fine, _, _ = barycentric_subdivide(K, G)
    assert len(fine.vertices) == 7
    assert len(fine.maximal_faces) == 6
    assert all(face.dim == 2 for face in fine.maximal_faces)


def test_mesh_halves_on_interval(unit_interval):
    K, G = unit_interval
    assert mesh(K, G) == 1.0
    for n in range(1, 5):
        K, G, _ = barycentric_subdivide(K, G)
        assert mesh(K, G) == pytest.approx(2.0 ** -n)


def test_mesh_of_equilateral_triangle():
    s = 2.5
    K = build_complex([(0, 1, 2)])
    G = GeometricRealization.from_mapping({0: [0, 0], 1: [s, 0], 2: [s / 2, s * math.sqrt(3) / 2]})
    assert mesh(K, G) == pytest.approx(s)


def test_carrier_on_subdivided_interval(unit_interval):
    fine, fine_G, _ = barycentric_subdivide(*unit_interval)
    assert carrier_of_point(0.25, fine, fine_G) == Simplex((0, 2))
    assert carrier_of_point(0.5, fine, fine_G) == Simplex((2,))
    assert carrier_of_point(1.0, fine, fine_G) == Simplex((1,))


def test_carrier_of_barycenter_is_the_face(triangle):
    K, G = triangle
    face = K.maximal_faces[0]
    assert carrier_of_point(G.barycenter(face), K, G) == face


def test_point_outside_complex(unit_interval):
    K, G = unit_interval
    with pytest.raises(OutsideComplexError):
        carrier_of_point(1.5, K, G)
    owner, coords = locate(K, G, np.array([[2.0], [0.5]]))
    assert owner.tolist() == [-1, 0]
    assert coords[0] is None
    assert np.allclose(coords[1], [0.5, 0.5])


def test_degenerate_triangle_rejected():
    K = build_complex([(0, 1, 2)])
    G = GeometricRealization.from_mapping({0: [0, 0], 1: [1, 1], 2: [2, 2]})
    with pytest.raises(GeometryError):
        check_realization(K, G)


def test_missing_coordinates_rejected():
    K = build_complex([(0, 1)])
    G = GeometricRealization.from_mapping({0: [0.0]})
    with pytest.raises(BuildError):
        barycentric_subdivide(K, G)


def test_samples_land_inside(triangle):
    K, G = triangle
    X = sample_points(K, G, 200, seed=3)
    owner, _ = locate(K, G, X)
    assert np.all(owner >= 0)


def test_face_grid_covers_vertices(triangle):
    K, G = triangle
    lam, X = face_grid(K.maximal_faces[0], G, 4)
    assert lam.shape == (15, 3)
    assert np.allclose(lam.sum(axis=1), 1.0)
    assert any(np.allclose(x, G[1]) for x in X)


def test_path_builder_spacing():
    K, G = path_complex(5, 0.25, start=1.0)
    assert len(K.faces_of_dim(1)) == 4
    assert G[4][0] == pytest.approx(2.0)


def test_json_file(tmp_path, triangle):
    K, G = triangle
    path = tmp_path / "triangle.json"
    dump_complex(K, G, path)
    K2, G2 = load_complex(path)
    assert len(K2) == len(K)
    assert np.allclose(G2.points, G.points)


def test_json_missing_keys():
    with pytest.raises(BuildError):
        complex_from_dict({"vertices": [[0.0]]})


@pytest.mark.parametrize("n", [1, 2, 3])
def test_subdivided_simplex_has_factorial_top_faces(n):
    fine, _, _ = barycentric_subdivide(*simplex_complex(n))
    assert len(fine.maximal_faces) == math.factorial(n + 1)
    assert all(face.dim == n for face in fine.maximal_faces)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_mesh_shrinks_by_dimension_factor(n):
    K, G = simplex_complex(n)
    for _ in range(2):
        fine, fine_G, _ = barycentric_subdivide(K, G)
        assert mesh(fine, fine_G) <= n / (n + 1) * mesh(K, G) + 1e-12
        K, G = fine, fine_G


@pytest.mark.parametrize("n", [2, 3])
def test_subdivision_keeps_the_support(n):
    K, G = simplex_complex(n)
    fine, fine_G, _ = barycentric_subdivide(K, G)
    coarse_points = sample_points(K, G, 1000, seed=11)
    fine_points = sample_points(fine, fine_G, 1000, seed=12)
    assert np.all(locate(fine, fine_G, coarse_points)[0] >= 0)
    assert np.all(locate(K, G, fine_points)[0] >= 0)
    # a point just outside stays outside after refinement
    outside = np.full((1, n), -0.01)
    assert locate(fine, fine_G, outside)[0][0] == -1
