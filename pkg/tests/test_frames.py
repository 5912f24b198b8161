import numpy as np
import pytest

import hamlip as hl
from hamlip.frames import frame_by_name


class TestHorizontalStep:
    def test_euclidean_axis(self):
        out = hl.horizontal_step(hl.Euclidean(2), [0.0, 0.0], [1.0, 0.0], 0.1)
        assert np.allclose(out, [0.1, 0.0])

    def test_heisenberg_origin(self):
        out = hl.horizontal_step(hl.Heisenberg(), [0.0, 0.0, 0.0], [1.0, 0.0], 0.1)
        assert np.allclose(out, [0.1, 0.0, 0.0])

    def test_heisenberg_off_axis(self):
        # X1(0, 1, 0) = (1, 0, -1/2)
        out = hl.horizontal_step(hl.Heisenberg(), [0.0, 1.0, 0.0], [1.0, 0.0], 0.1)
        assert np.allclose(out, [0.1, 1.0, -0.05])

    def test_zero_coefficients_identity(self):
        x = np.array([0.3, -0.2, 0.05])
        out = hl.horizontal_step(hl.Heisenberg(), x, [0.0, 0.0], 0.2)
        assert np.array_equal(out, x)

    def test_grushin_degenerate_on_axis(self):
        out = hl.horizontal_step(hl.Grushin(), [0.0, 0.5], [0.0, 1.0], 0.1)
        assert np.allclose(out, [0.0, 0.5])

    def test_by_name(self):
        assert frame_by_name("euclidean(3)").n == 3
        assert frame_by_name("heisenberg").m == 2
        with pytest.raises(Exception):
            frame_by_name("nope")


class TestHorizontalGradient:
    def test_linear_exact_euclidean(self, euclid2):
        dom = hl.build_domain("box", [[0.0, 1.0], [0.0, 1.0]], 0.125, frame=euclid2)
        a = np.array([2.0, -3.0])
        vals = dom.coords @ a
        grad, flags = hl.horizontal_gradient(euclid2, dom, vals)
        assert not flags.any()
        assert np.allclose(grad, a, atol=1e-12)

    def test_constant_zero_exact(self, euclid2):
        dom = hl.build_domain("box", [[0.0, 1.0], [0.0, 1.0]], 0.25, frame=euclid2)
        grad, flags = hl.horizontal_gradient(euclid2, dom, np.full(dom.num_vertices, 3.5))
        assert not flags.any()
        assert np.array_equal(grad, np.zeros_like(grad))

    def test_heisenberg_vertical_coordinate(self):
        fr = hl.Heisenberg()
        # z-extent must cover the gradient steps dz = +-h*y/2 at y ~ 1
        dom = hl.build_domain(
            "box", [[-0.5, 0.5], [0.0, 2.0], [-0.3125, 0.3125]], 0.25, frame=fr
        )
        grad, flags = hl.horizontal_gradient(fr, dom, dom.coords[:, 2].copy())
        ids = dom.interior_ids
        pick = np.argmin(np.linalg.norm(dom.coords[ids] - np.array([0.0, 1.0, 0.0]), axis=1))
        assert not flags[pick]
        # X1 z = -y/2, X2 z = x/2
        assert grad[pick, 0] == pytest.approx(-0.5, abs=1e-12)
        assert grad[pick, 1] == pytest.approx(0.0, abs=1e-12)

    def test_one_sided_flag_on_cut_domain(self, euclid2):
        dom = hl.build_domain("slit-disk", [[-1.0, 1.0], [-1.0, 1.0]], 0.1, frame=euclid2)
        vals = dom.coords[:, 1].copy()
        grad, flags = hl.horizontal_gradient(euclid2, dom, vals)
        # vertices on the slit row have their downward step cut
        on_slit = np.flatnonzero(
            (np.abs(dom.coords[dom.interior_ids][:, 1]) < 1e-12)
            & (dom.coords[dom.interior_ids][:, 0] >= 0.0)
            & (dom.coords[dom.interior_ids][:, 0] < 1.0)
        )
        assert flags[on_slit].all()
        off_slit = np.flatnonzero(np.abs(dom.coords[dom.interior_ids][:, 1]) > 0.15)
        assert not flags[off_slit].any()

    def test_lattice_exact_for_anisotropic_spacings(self):
        # Heisenberg steps from lattice points land on lattice points
        fr = hl.Heisenberg()
        dom = hl.build_domain("box", [[-0.4, 0.4], [-0.4, 0.4], [-0.02, 0.02]], 0.1, frame=fr)
        pts = dom.coords[dom.interior_ids]
        stepped = hl.horizontal_step(fr, pts, np.array([1.0, 1.0]), dom.h)
        snapped = dom.origin + dom.snap(stepped) * dom.spacings
        assert np.allclose(stepped, snapped, atol=1e-12)
