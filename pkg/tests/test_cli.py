import csv
import io
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from ahgmm.cli import run
from ahgmm.dataset import synthetic_faces
from ahgmm.hopping import derive_plan, HoppingPlan
from ahgmm.imageio import load_image, save_image

SEED = "00" * 31 + "01"
SECRET = "c0ffee" * 10 + "abcd"


@pytest.fixture
def face_png(tmp_path):
    p = tmp_path / "f.png"
    save_image(synthetic_faces(1, seed=21)[0], p)
    return p


def filter_args(src, dst, *extra):
    return ["filter", "--algo", "ahgmm", "--in", str(src), "--out", str(dst), "--rho-o", "0.5", *extra]


def test_filter_is_deterministic_across_runs_and_threads(tmp_path, face_png):
    outs = []
    for name, threads in (("a", "1"), ("b", "1"), ("c", "8")):
        dst = tmp_path / f"{name}.png"
        assert run(filter_args(face_png, dst, "--seed", SEED, "--threads", threads)) == 0
        outs.append(dst.read_bytes())
    assert outs[0] == outs[1] == outs[2]
    assert outs[0] != face_png.read_bytes()


def test_seed_from_environment(tmp_path, face_png, monkeypatch):
    run(filter_args(face_png, tmp_path / "a.png", "--seed", SEED))
    monkeypatch.setenv("AHGMM_SEED", SEED)
    run(filter_args(face_png, tmp_path / "b.png"))
    assert (tmp_path / "a.png").read_bytes() == (tmp_path / "b.png").read_bytes()


def test_missing_seed_is_usage_error(tmp_path, face_png, capsys, monkeypatch):
    monkeypatch.delenv("AHGMM_SEED", raising=False)
    assert run(filter_args(face_png, tmp_path / "x.png")) == 1
    assert "--seed" in capsys.readouterr().err
    assert not (tmp_path / "x.png").exists()


def test_seed_never_printed(tmp_path, face_png, capsys):
    report, plan = tmp_path / "r.json", tmp_path / "plan.json"
    assert run(filter_args(face_png, tmp_path / "p.png", "--seed", SECRET,
                           "--report", str(report), "--plan-out", str(plan))) == 0
    out = capsys.readouterr()
    blob = out.out + out.err + report.read_text() + plan.read_text()
    assert SECRET not in blob and SECRET[:12] not in blob
    data = json.loads(report.read_text())
    assert data["gated"] and data["n_regions"] == 576 and len(data["seed_id"]) == 12


def test_plan_sidecar_drives_accurate_attack(tmp_path, face_png):
    prot, plan = tmp_path / "p.png", tmp_path / "plan.json"
    run(filter_args(face_png, prot, "--seed", SEED, "--plan-out", str(plan)))
    a, b = tmp_path / "a.png", tmp_path / "b.png"
    assert run(["attack", "--kind", "accurate", "--plan", str(plan), "--in", str(prot), "--out", str(a)]) == 0
    assert run(["attack", "--kind", "accurate", "--seed", SEED, "--in", str(prot), "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert HoppingPlan.load(plan).n_regions == 576


@pytest.mark.parametrize("algo", ["agb", "fgb", "svgb"])
def test_baseline_algorithms(tmp_path, face_png, algo):
    dst, kern = tmp_path / "o.png", tmp_path / "k.txt"
    assert run(["filter", "--algo", algo, "--in", str(face_png), "--out", str(dst),
                "--dump-kernel", str(kern)]) == 0
    w = np.loadtxt(kern, ndmin=2)
    assert abs(w.sum() - 1) < 1e-9
    assert load_image(dst).width == 96


def test_face_box_and_explicit_density(tmp_path, face_png):
    dst = tmp_path / "o.png"
    assert run(["filter", "--algo", "agb", "--in", str(face_png), "--out", str(dst),
                "--face", "10,20,40,30", "--rho-h", "2", "--rho-v", "2"]) == 0
    before, after = load_image(face_png).data, load_image(dst).data
    assert np.array_equal(before[:, :20], after[:, :20])
    assert not np.array_equal(before[:, 20:50, 10:50], after[:, 20:50, 10:50])


@pytest.mark.parametrize("argv,code", [
    (["filter", "--algo", "agb", "--in", "missing.png", "--out", "x.png"], 2),
    (["filter", "--algo", "agb", "--in", "{face}", "--out", "{tmp}/x.png", "--face", "90,90,20,20"], 3),
    (["filter", "--algo", "agb", "--in", "{face}", "--out", "{tmp}/x.png", "--config", "{tmp}/bad.toml"], 4),
    (["filter", "--in", "{face}", "--out", "{tmp}/x.png", "--seed", "nothex"], 4),
    (["filter", "--algo", "agb", "--in", "{face}", "--out", "{tmp}/x.png", "--rho-h", "2"], 1),
    (["frobnicate"], 1),
])
def test_exit_codes(tmp_path, face_png, argv, code):
    (tmp_path / "bad.toml").write_text("[oops]\n")
    argv = [a.format(face=face_png, tmp=tmp_path) for a in argv]
    assert run(argv) == code


def test_dataset_batch_filter_attack_and_metrics(tmp_path, capsys):
    ds, prot, rec = tmp_path / "ds", tmp_path / "prot", tmp_path / "rec"
    assert run(["dataset", "--out", str(ds), "--synthetic", "2", "--factors", "1,2,16",
                "--pitches", "0,30"]) == 0
    manifest = json.loads((ds / "manifest.json").read_text())
    assert len(manifest["entries"]) == 12
    report = tmp_path / "r.json"
    assert run(["filter", "--algo", "ahgmm", "--in", str(ds), "--out", str(prot), "--seed", SEED,
                "--report", str(report)]) == 0
    items = json.loads(report.read_text())["items"]
    assert sum(i["gated"] for i in items) == 8  # the 6x6 rungs pass through
    assert run(["attack", "--kind", "accurate", "--seed", SEED, "--in", str(prot), "--out", str(rec)]) == 0
    capsys.readouterr()
    assert run(["metrics", "--ref", str(ds), "--test", str(prot)]) == 0
    m = json.loads(capsys.readouterr().out)
    assert m["n_images"] == 12 and 0 < m["psnr_db"] < 60


def test_metrics_tally(tmp_path, capsys):
    p = tmp_path / "t.csv"
    p.write_text("pair_id,same_subject,predicted_same\n1,1,1\n2,0,1\n3,0,0\n")
    assert run(["metrics", "--tally", str(p)]) == 0
    assert json.loads(capsys.readouterr().out)["accuracy"] == pytest.approx(2 / 3)


def test_bench_timing_csv(tmp_path):
    out = tmp_path / "t.csv"
    assert run(["bench", "--suite", "timing", "--n", "1", "--out", str(out)]) == 0
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert [r["filter"] for r in rows] == ["agb", "svgb", "ahgmm", "fgb"]


def test_module_entry_point(tmp_path, face_png):
    env = dict(os.environ, AHGMM_SEED=SEED)
    res = subprocess.run([sys.executable, "-m", "ahgmm", "filter", "--in", str(face_png),
                          "--out", str(tmp_path / "p.png")], env=env, capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    assert SEED not in res.stdout + res.stderr
