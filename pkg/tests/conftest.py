import warnings

import numpy as np
import pytest

import hamlip as hl

warnings.filterwarnings("ignore", message=".*TBB.*")


@pytest.fixture(scope="session")
def euclid2():
    return hl.Euclidean(2)


@pytest.fixture(scope="session")
def box_graph(euclid2):
    dom = hl.build_domain("box", [[0.0, 1.0], [0.0, 1.0]], 0.1, frame=euclid2)
    return hl.build_graph(dom, euclid2, hl.StencilSpec(2))


@pytest.fixture(scope="session")
def box_sub(box_graph):
    return hl.domains.whole_domain(box_graph)


@pytest.fixture(autouse=True)
def _quiet_degenerate_level_warnings():
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message=".*lambda_H.*")
        yield


def linear_boundary(sub, a):
    a = np.asarray(a, dtype=np.float64)
    return hl.BoundaryFunction.from_callable(sub, lambda c: c @ a)
