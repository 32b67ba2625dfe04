import csv
import itertools
import math

import numpy as np
import pytest

from hextop.mesh import MeshParams, build_mesh, counts, export_mesh, hanging_nodes

from oracles import constructive_mesh, hexagon_vertex_count

C30 = math.cos(math.pi / 6)


def test_params_validation():
    for bad in [(0, 3), (3, 0), (-1, 2)]:
        with pytest.raises(ValueError):
            MeshParams(*bad)
    with pytest.raises(ValueError):
        MeshParams(2, 2, edge=0.0)
    with pytest.raises(ValueError):
        counts((0, 4))


@pytest.mark.parametrize("dims,expected", [((4, 3), (11, 36)), ((1, 1), (1, 6)), ((4, 4), (14, 43))])
def test_counts_examples(dims, expected):
    assert counts(dims) == expected
    m = build_mesh(dims)
    assert (m.nelem, m.nnode) == expected


def test_single_hexagon():
    a = 0.7
    m = build_mesh(MeshParams(1, 1, a))
    assert (m.elem_nodes[0] + 1).tolist() == [6, 5, 4, 1, 2, 3]
    np.testing.assert_allclose(m.coords[0], [0.0, 0.25 * a])
    np.testing.assert_allclose(m.coords[1], [a * C30, -0.25 * a])
    np.testing.assert_allclose(m.centroids[0], [a * C30, 0.75 * a])


def test_hanging_nodes_4x4():
    # 1-based ids before compaction
    assert [n + 1 for n in hanging_nodes((4, 4))] == [37, 45]
    assert hanging_nodes((4, 3)) == []


def test_matches_loop_construction():
    for dims in [(1, 1), (1, 2), (2, 2), (3, 5), (4, 4), (5, 6)]:
        coords, elems = constructive_mesh(*dims, a=1.3)
        m = build_mesh(MeshParams(*dims, 1.3))
        np.testing.assert_allclose(m.coords, np.array(coords), atol=1e-14)
        assert (m.elem_nodes + 1).tolist() == elems


def test_dof_interleaving():
    m = build_mesh((5, 4))
    d = m.elem_dofs + 1
    n = m.elem_nodes + 1
    assert np.array_equal(d[:, 0::2], 2 * n - 1)
    assert np.array_equal(d[:, 1::2], 2 * n)


@pytest.mark.parametrize("dims", [(4, 3), (4, 4), (6, 5), (3, 8)])
def test_no_unreferenced_nodes(dims):
    m = build_mesh(dims)
    assert set(m.elem_nodes.ravel()) == set(range(m.nnode))


def test_single_column_even_rows_keeps_count_formula():
    # odd element rows are empty when hnex == 1, so the top-center node stays unused
    m = build_mesh((1, 2))
    assert m.nnode == counts((1, 2))[1] == 7
    assert len(set(m.elem_nodes.ravel())) == 6


def test_distinct_vertices_match_node_count():
    for hnex, hney in itertools.product(range(2, 7), range(1, 7)):
        assert hexagon_vertex_count(hnex, hney) == counts((hnex, hney))[1]


@pytest.mark.parametrize("a", [1 / math.sqrt(3), 1.0, 2.5])
def test_regular_congruent_hexagons(a):
    m = build_mesh(MeshParams(5, 4, a))
    poly = m.element_polygons()
    edges = np.linalg.norm(poly - np.roll(poly, -1, axis=1), axis=2)
    np.testing.assert_allclose(edges, a, atol=1e-12)
    x, y = poly[..., 0], poly[..., 1]
    signed = 0.5 * np.sum(x * np.roll(y, -1, axis=1) - np.roll(x, -1, axis=1) * y, axis=1)
    # positive signed area: counter-clockwise
    np.testing.assert_allclose(signed, 1.5 * math.sqrt(3) * a * a, atol=1e-12)
    np.testing.assert_allclose(m.element_area(), 1.5 * math.sqrt(3) * a * a)


def test_centroids_are_vertex_means():
    m = build_mesh(MeshParams(4, 3, 0.9))
    np.testing.assert_allclose(m.centroids, m.element_polygons().mean(axis=1), atol=1e-13)
    a = 0.9
    np.testing.assert_allclose(m.centroids[0], [a * C30, 0.75 * a])
    np.testing.assert_allclose(m.centroids[4], [2 * a * C30, 2.25 * a])


def test_export(tmp_path):
    m = build_mesh((4, 4))
    nf, ef = export_mesh(m, tmp_path)
    with open(nf) as fh:
        nodes = list(csv.reader(fh))
    with open(ef) as fh:
        elems = list(csv.reader(fh))
    assert nodes[0] == ["id", "x", "y"] and len(nodes) - 1 == 43
    assert len(elems) - 1 == 14
    assert max(int(v) for row in elems[1:] for v in row[1:]) == 43
    got = np.array([[float(v) for v in row[1:]] for row in nodes[1:]])
    assert np.array_equal(got, m.coords)


def test_export_sizes(tmp_path):
    export_mesh(build_mesh((1, 1)), tmp_path / "a")
    export_mesh(build_mesh((4, 3)), tmp_path / "b")
    assert len((tmp_path / "a" / "nodes.csv").read_text().splitlines()) == 7
    assert len((tmp_path / "b" / "elements.csv").read_text().splitlines()) == 12


def test_export_failure_names_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError, match="file"):
        export_mesh(build_mesh((1, 1)), blocker / "sub")
