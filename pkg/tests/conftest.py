import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from xsbfem.material import isotropic  # noqa: E402
from xsbfem.mesh import (CrackGeometry, build_structured_mesh, classify_regions,  # noqa: E402
                         extract_sbfem_subdomain)


@pytest.fixture
def steel():
    return isotropic(2.0e11, 0.3, "plane_strain")


@pytest.fixture
def cracked_subdomain():
    """Node-centred tip with four layers: 32 boundary elements around the tip."""
    mesh = build_structured_mesh(10.0, 10.0, 20, 20)
    crack = CrackGeometry.segment([0.0, 5.0], [5.0, 5.0])
    cls = classify_regions(mesh, crack, n_layers=4)
    return extract_sbfem_subdomain(mesh, cls, crack)


@pytest.fixture
def closed_subdomain():
    mesh = build_structured_mesh(4.0, 4.0, 8, 8)
    cls = classify_regions(mesh, None, n_layers=2, sbfem_centers=[[2.0, 2.0]])
    return extract_sbfem_subdomain(mesh, cls)
