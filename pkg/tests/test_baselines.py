import numpy as np
import pytest

from ahgmm.baselines import (REFERENCE_DENSITY, SvgbConfig, blur_face, filter_agb, filter_fgb,
                             filter_svgb, ring_index_map, ring_sigmas)
from ahgmm.geometry import DensityThreshold, FaceRegion, PixelDensity, density_from_face_size
from ahgmm.kernel import KernelSpec, discretize, optimal_sigma, optimal_spec
from ahgmm.metrics import psnr

THR = DensityThreshold.uniform(0.5)
FACE = FaceRegion.full(96, 96)


def test_agb_sigmas():
    spec = optimal_spec(PixelDensity(6.21, 4.63), THR)
    assert (round(spec.sigma_h, 2), round(spec.sigma_v, 2)) == (11.86, 8.84)


def test_agb_gate_boundary_passthrough(faces):
    img = faces[0]
    assert filter_agb(img, FACE, PixelDensity(0.5, 3.0), THR) is img
    assert filter_svgb(img, FACE, PixelDensity(3.0, 0.5), THR) is img


def test_fgb_equals_agb_at_reference_density(faces):
    img = faces[0]
    np.testing.assert_array_equal(filter_fgb(img, FACE, THR).data,
                                  filter_agb(img, FACE, REFERENCE_DENSITY, THR).data)


def test_fgb_overblurs_lower_density_faces(faces):
    img = faces[1]
    low = density_from_face_size(96, np.radians(50))
    fgb = optimal_spec(REFERENCE_DENSITY, THR)
    agb = optimal_spec(low, THR)
    assert fgb.sigma_v > agb.sigma_v
    assert psnr(img, filter_fgb(img, FACE, THR)) <= psnr(img, filter_agb(img, FACE, low, THR))


def test_threshold_ratio():
    assert optimal_sigma(4.0, 0.3) / optimal_sigma(4.0, 0.5) == pytest.approx(5 / 3, rel=1e-12)


def test_ring_sigmas():
    np.testing.assert_allclose(ring_sigmas(1.0, SvgbConfig(4, 0.05)),
                               [1, 0.95, 0.9025, 0.857375], rtol=1e-12)


def test_ring_map_covers_all_rings():
    idx = ring_index_map(96, 96, 4)
    assert set(np.unique(idx)) == {0, 1, 2, 3}
    assert idx[48, 48] == 0 and idx[0, 0] == 3


def test_svgb_without_decay_is_isotropic_agb(faces):
    img, density = faces[2], PixelDensity(6.21, 4.63)
    spec = optimal_spec(density, THR)
    s0 = max(spec.sigma_h, spec.sigma_v)
    iso = blur_face(img, FACE, discretize(KernelSpec.centered(s0, s0)))
    np.testing.assert_array_equal(filter_svgb(img, FACE, density, THR, SvgbConfig(4, 0.0)).data,
                                  iso.data)


@pytest.mark.parametrize("kw", [dict(n_rings=0), dict(decay=1.0), dict(decay=-0.1)])
def test_svgb_config_validation(kw):
    with pytest.raises(ValueError):
        SvgbConfig(**kw)
