import json
import math

import numpy as np
import pytest

from ahgmm.dataset import (build_ladder, downsample, layout_dataset, load_manifest,
                           synthetic_faces)
from ahgmm.geometry import DensityThreshold, density_from_face_size, gate
from ahgmm.imageio import ImagePlane, load_image


@pytest.fixture(scope="module")
def sources():
    return synthetic_faces(10, seed=9)


def test_ladder_sizes_and_densities(sources):
    rungs = build_ladder(sources[0])
    assert [r.size for r in rungs] == [96, 48, 24, 12, 6]
    assert (round(rungs[0].density.rho_h, 2), round(rungs[0].density.rho_v, 2)) == (6.21, 4.63)
    assert (round(rungs[1].density.rho_h, 2), round(rungs[1].density.rho_v, 2)) == (3.11, 2.31)
    assert [r.inherently_protected for r in rungs] == [False] * 4 + [True]


def test_smallest_rung_is_not_gated_at_usual_thresholds(sources):
    rung = build_ladder(sources[0])[-1]
    assert not gate(rung.density, DensityThreshold.uniform(0.5))


def test_downsample_preserves_constant():
    img = ImagePlane(np.full((1, 96, 96), 77.0))
    np.testing.assert_allclose(downsample(img, 4).data, 77.0, atol=1e-9)


def test_ladder_rejects_wrong_size():
    with pytest.raises(ValueError):
        build_ladder(ImagePlane(np.zeros((1, 64, 64))))


def test_synthetic_faces_deterministic():
    a, b = synthetic_faces(2, seed=3), synthetic_faces(2, seed=3)
    assert all(np.array_equal(x.data, y.data) for x, y in zip(a, b))
    assert not np.array_equal(a[0].data, a[1].data)


def test_layout(tmp_path, sources):
    images = [(f"s{i}", img) for i, img in enumerate(sources)]
    mpath = layout_dataset(tmp_path / "a", images)
    manifest = load_manifest(mpath)
    assert len(manifest["entries"]) == 400
    assert len(list((tmp_path / "a").rglob("*.png"))) == 400
    for e in manifest["entries"][::37]:
        d = density_from_face_size(e["size"], math.radians(e["pitch_deg"]))
        assert (e["rho_h"], e["rho_v"]) == (d.rho_h, d.rho_v)
        assert load_image(tmp_path / "a" / e["path"]).width == e["size"]
    again = load_manifest(layout_dataset(tmp_path / "b", images))
    assert [e["sha256"] for e in again["entries"]] == [e["sha256"] for e in manifest["entries"]]


def test_manifest_version_checked(tmp_path):
    p = tmp_path / "m.json"
    p.write_text(json.dumps({"format": "ahgmm-dataset", "version": 99}))
    with pytest.raises(ValueError):
        load_manifest(p)
