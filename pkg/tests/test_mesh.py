import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from xsbfem.errors import GeometryError
from xsbfem.mesh import (CrackGeometry, Region, build_structured_mesh, classify_regions,
                         extract_sbfem_subdomain, mesh_to_json)


def _centre_crack(mesh, ti, tj, x0=0.0):
    y = (tj + 0.5) * mesh.hy
    return CrackGeometry.segment([x0, y], [(ti + 0.5) * mesh.hx, y])


def test_single_cell_mesh():
    m = build_structured_mesh(1, 1, 1, 1)
    assert m.n_nodes == 4 and m.n_elements == 1
    assert {tuple(p) for p in m.nodes} == {(0, 0), (1, 0), (0, 1), (1, 1)}


def test_counts():
    m = build_structured_mesh(10, 10, 2, 2)
    assert (m.n_nodes, m.n_elements) == (9, 4)


@pytest.mark.parametrize("args", [(0, 1, 2, 2), (1, 1, 0, 3), (1, 1, 2.5, 2)])
def test_bad_mesh_arguments(args):
    with pytest.raises(GeometryError):
        build_structured_mesh(*args)


def test_no_crack_is_all_fem():
    m = build_structured_mesh(10, 10, 8, 8)
    cls = classify_regions(m, None)
    assert cls.count(Region.FEM) == m.n_elements
    assert cls.heaviside_nodes.size == 0
    assert classify_regions(m, CrackGeometry(np.zeros((0, 2)))).count(Region.FEM) == 64


def test_one_layer_tags_tip_element():
    m = build_structured_mesh(10, 10, 40, 40)
    crack = _centre_crack(m, 20, 20)
    cls = classify_regions(m, crack, 1)
    sb = np.flatnonzero(cls.element_region == Region.SBFEM)
    assert sb.tolist() == [m.element_id(20, 20)]
    split = np.flatnonzero(cls.element_region == Region.XFEM_SPLIT)
    assert split.tolist() == [m.element_id(i, 20) for i in range(20)]


def test_three_layers_block_and_interior():
    m = build_structured_mesh(10, 10, 40, 40)
    cls = classify_regions(m, _centre_crack(m, 20, 20), 3)
    assert cls.count(Region.SBFEM) + cls.count(Region.UNUSED_INTERIOR) == 25
    assert cls.count(Region.UNUSED_INTERIOR) == 9
    for i in range(19, 22):
        for j in range(19, 22):
            assert cls.element_region[m.element_id(i, j)] == Region.UNUSED_INTERIOR


def test_single_tip_element_subdomain():
    m = build_structured_mesh(10, 10, 40, 40)
    crack = _centre_crack(m, 20, 20)
    sub = extract_sbfem_subdomain(m, classify_regions(m, crack, 1), crack)
    assert sub.n_nodes == 6 and sub.n_elements == 5
    assert np.allclose(sub.node_coords[0], sub.node_coords[-1])
    assert sub.mouth_edge_shape == pytest.approx((0.5, 0.5))
    assert sub.is_star_convex()


def test_two_layer_subdomain_node_count():
    # 3 x 3 block: 12 perimeter nodes plus the two mouth copies
    m = build_structured_mesh(10, 10, 40, 40)
    crack = _centre_crack(m, 20, 20)
    sub = extract_sbfem_subdomain(m, classify_regions(m, crack, 2), crack)
    assert sub.n_nodes == 14 and sub.n_elements == 13


def test_node_tip_uses_even_block(cracked_subdomain):
    assert cracked_subdomain.n_elements == 32
    assert cracked_subdomain.mouth_edge_shape == (1.0,)


def test_mouth_faces_ordered_lower_then_upper(cracked_subdomain):
    th_first = cracked_subdomain.theta(0, -1.0 + 1e-9)
    th_last = cracked_subdomain.theta(cracked_subdomain.n_elements - 1, 1.0 - 1e-9)
    assert th_first == pytest.approx(-np.pi, abs=1e-6)
    assert th_last == pytest.approx(np.pi, abs=1e-6)


def test_block_overflow():
    m = build_structured_mesh(1, 1, 6, 6)
    with pytest.raises(GeometryError):
        classify_regions(m, _centre_crack(m, 4, 3), 3)


def test_invalid_crack_placements():
    m = build_structured_mesh(1, 1, 6, 6)
    with pytest.raises(GeometryError):
        classify_regions(m, CrackGeometry.segment([0.0, 1.5], [0.5, 1.5]), 1)
    with pytest.raises(GeometryError):
        classify_regions(m, CrackGeometry.segment([0.0, 0.0], [0.5, 0.5]), 1)
    # without a tip block the crack may not end inside an element
    with pytest.raises(GeometryError):
        classify_regions(m, _centre_crack(m, 3, 3), 1, tip_blocks=False)


def test_through_crack_has_no_blocks():
    m = build_structured_mesh(1, 1, 6, 6)
    cls = classify_regions(m, CrackGeometry.segment([0.0, 0.5], [1.0, 0.5]), 1)
    assert not cls.blocks
    assert cls.count(Region.XFEM_SPLIT) == 6


def test_two_tips_found():
    m = build_structured_mesh(1, 1, 20, 20)
    crack = CrackGeometry.segment([0.275, 0.525], [0.725, 0.525])
    tips = crack.tips(m)
    assert len(tips) == 2
    cls = classify_regions(m, crack, 2)
    assert len(cls.blocks) == 2
    assert {b.label for b in cls.blocks} == {t.label for t in tips}


@given(st.integers(8, 16), st.integers(8, 16), st.integers(1, 3), st.data())
@settings(max_examples=30, deadline=None)
def test_region_partition(nx, ny, n_layers, data):
    m = build_structured_mesh(2.0, 1.0, nx, ny)
    ti = data.draw(st.integers(n_layers, nx - n_layers - 1))
    tj = data.draw(st.integers(n_layers - 1, ny - n_layers))
    cls = classify_regions(m, _centre_crack(m, ti, tj), n_layers)
    total = sum(cls.count(r) for r in Region)
    assert total == m.n_elements
    sub = extract_sbfem_subdomain(m, cls, _centre_crack(m, ti, tj))
    assert sub.is_star_convex()
    # every non-mouth boundary node is a mesh node
    assert np.all(sub.mesh_nodes[1:-1] >= 0)


def test_json_roundtrip():
    m = build_structured_mesh(1, 1, 4, 4)
    cls = classify_regions(m, _centre_crack(m, 2, 2), 1)
    doc = json.loads(mesh_to_json(m, cls))
    assert len(doc["mesh"]["nodes"]) == 25
    assert doc["classification"]["element_region"].count("SBFEM") == 1


def test_uncracked_block(closed_subdomain):
    assert not closed_subdomain.cracked
    assert closed_subdomain.n_elements == 16
    assert closed_subdomain.mouth_point is None
