"""Command line entry point: ``ahgmm {filter,attack,dataset,metrics,bench}``.

Exit codes: 0 success, 1 usage, 2 I/O, 3 numeric / kernel, 4 configuration.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
from dataclasses import replace

from . import bench
from .attacks import KINDS, AdversaryModel, attack_inverse
from .baselines import REFERENCE_DENSITY, SvgbConfig
from .config import camera_from, hopping_from, load_config, threshold_from
from .dataset import (DEFAULT_FACTORS, DEFAULT_PITCHES_DEG, SOURCE_SIZE,
                      layout_dataset, load_manifest, synthetic_faces)
from .errors import AhgmmError, ConfigError
from .filter import plan_for_face
from .geometry import (DensityThreshold, FaceRegion, PixelDensity,
                       density_from_camera, density_from_face_size, gate)
from .hopping import HoppingPlan, parse_seed, seed_fingerprint
from .imageio import ImagePlane, crop, load_image, save_image
from .kernel import discretize, dump_kernel, optimal_spec
from .metrics import (accuracy_from_tally, dataset_mse, format_db, psnr_from_mse,
                      read_tally)

SEED_ENV = "AHGMM_SEED"
REPORT_VERSION = 1


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _csv_numbers(text, kind=float):
    try:
        return [kind(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="TOML or JSON config; flags override it")
    p.add_argument("--face", type=lambda t: _csv_numbers(t, int), metavar="X,Y,W,H",
                   help="face bounding box (default: whole image)")
    p.add_argument("--rho-h", type=float, help="horizontal pixel density, px/cm")
    p.add_argument("--rho-v", type=float, help="vertical pixel density, px/cm")
    p.add_argument("--pitch", type=float, default=0.0,
                   help="pitch in degrees for face-size density labelling (default 0)")
    p.add_argument("--theta-r", type=float, help="view angle in degrees (camera model)")
    p.add_argument("--h2", type=float, help="face height above ground, cm (camera model)")
    p.add_argument("--rho-o", type=float, help="threshold density for both axes, px/cm")
    p.add_argument("--rho-o-h", type=float)
    p.add_argument("--rho-o-v", type=float)
    p.add_argument("--q", type=int, help="sub-region size in px (both axes)")
    p.add_argument("--m", type=int, help="number of supplementary kernels")
    p.add_argument("--gamma", type=float, help="relative size of supplementary kernels")
    p.add_argument("--seed", help=f"256-bit key as hex (or set {SEED_ENV})")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--report", help="write a JSON report here")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ahgmm", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("filter", help="protect a face")
    _common(p)
    p.add_argument("--algo", choices=bench.ALGORITHMS, default="ahgmm")
    p.add_argument("--in", dest="inp", required=True, help="image, or dataset root with manifest.json")
    p.add_argument("--out", required=True)
    p.add_argument("--no-global", action="store_true", help="skip the de-blocking blur (ahgmm)")
    p.add_argument("--plan-out", help="write the hopping plan sidecar (ahgmm, single image)")
    p.add_argument("--dump-kernel", help="write the optimal kernel as a text matrix")
    p.add_argument("--rings", type=int, help="SVGB ring count")
    p.add_argument("--decay", type=float, help="SVGB per-ring sigma decay")

    p = sub.add_parser("attack", help="reconstruct protected faces by Wiener deconvolution")
    _common(p)
    p.add_argument("--kind", choices=KINDS, required=True)
    p.add_argument("--nsr", type=float, help="Wiener noise-to-signal ratio (default 1e-4)")
    p.add_argument("--plan", help="hopping plan sidecar (accurate, single image)")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--no-global", action="store_true",
                   help="the protected faces were made without the de-blocking blur")

    p = sub.add_parser("dataset", help="write the multi-resolution ladder")
    p.add_argument("--out", required=True)
    p.add_argument("--src", nargs="*", default=[], help="96x96 source images or directories")
    p.add_argument("--synthetic", type=int, default=0, help="add N procedural faces")
    p.add_argument("--face-seed", type=int, default=0)
    p.add_argument("--factors", type=lambda t: _csv_numbers(t, int), default=list(DEFAULT_FACTORS))
    p.add_argument("--pitches", type=_csv_numbers, default=list(DEFAULT_PITCHES_DEG))
    p.add_argument("--report")

    p = sub.add_parser("metrics", help="PSNR between images or trees, accuracy from tallies")
    p.add_argument("--ref", help="reference image or dataset root")
    p.add_argument("--test", help="test image or tree with the same layout")
    p.add_argument("--tally", help="recogniser CSV: pair_id,same_subject,predicted_same")
    p.add_argument("--r-max", type=float, default=255.0)
    p.add_argument("--report")

    p = sub.add_parser("bench", help="run a benchmark suite and write CSV")
    p.add_argument("--suite", choices=("psnr-ordering", "attack-asymmetry", "timing"),
                   required=True)
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--rho-o", type=float, default=0.5)
    p.add_argument("--nsr", type=float, default=1e-4)
    p.add_argument("--seed", help=f"master key as hex (or set {SEED_ENV}); default all-zero")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", help="CSV path (default stdout)")
    return parser


def _config(args) -> dict:
    return load_config(args.config) if getattr(args, "config", None) else {}


def _seed(args, required: bool):
    text = args.seed or os.environ.get(SEED_ENV)
    if text is None:
        if required:
            raise UsageError("a secret key is required: pass --seed HEX or set " + SEED_ENV)
        return None
    return parse_seed(text)


def _face(args, cfg, img: ImagePlane) -> FaceRegion:
    fc = dict(cfg.get("face", {}))
    if args.face is not None:
        if len(args.face) != 4:
            raise UsageError("--face takes X,Y,W,H")
        fc.update(zip(("x", "y", "width", "height"), args.face))
    if args.theta_r is not None:
        fc["theta_r"] = math.radians(args.theta_r)
    if args.h2 is not None:
        fc["h2"] = args.h2
    fc.setdefault("x", 0)
    fc.setdefault("y", 0)
    fc.setdefault("width", img.width - fc["x"])
    fc.setdefault("height", img.height - fc["y"])
    face = FaceRegion(**fc)
    crop(img, face)
    return face


def _density(args, cfg, face: FaceRegion) -> PixelDensity:
    if args.rho_h is not None or args.rho_v is not None:
        if args.rho_h is None or args.rho_v is None:
            raise UsageError("--rho-h and --rho-v go together")
        return PixelDensity(args.rho_h, args.rho_v)
    cam = camera_from(cfg)
    if cam is not None:
        return density_from_camera(cam, face)
    return density_from_face_size(face.width, math.radians(args.pitch))


def _threshold(args, cfg) -> DensityThreshold:
    thr = threshold_from(cfg)
    h = args.rho_o_h if args.rho_o_h is not None else args.rho_o
    v = args.rho_o_v if args.rho_o_v is not None else args.rho_o
    return DensityThreshold(h if h is not None else thr.rho_h_o,
                            v if v is not None else thr.rho_v_o)


def _hopping(args, cfg, seed):
    hop = hopping_from(cfg, seed)
    kw = {}
    if args.q is not None:
        kw.update(q_h=args.q, q_v=args.q)
    if args.m is not None:
        kw["num_supplementary"] = args.m
    if args.gamma is not None:
        kw["gamma"] = args.gamma
    try:
        return replace(hop, **kw)
    except AhgmmError as exc:
        raise ConfigError(str(exc)) from exc


def _write_json(path, payload) -> None:
    if path is None:
        return
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _density_dict(d: PixelDensity) -> dict:
    return {"rho_h": d.rho_h, "rho_v": d.rho_v}


def _sha256(path) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _is_dataset(path) -> bool:
    return os.path.isdir(path) and os.path.exists(os.path.join(path, "manifest.json"))


def _batch(args, cfg, per_item) -> list[dict]:
    """Apply ``per_item(img, face, density, index) -> (image, info)`` over a dataset tree."""
    manifest = load_manifest(os.path.join(args.inp, "manifest.json"))
    results = []
    for i, entry in enumerate(manifest["entries"]):
        img = load_image(os.path.join(args.inp, entry["path"]))
        face = FaceRegion.full(img.width, img.height)
        density = PixelDensity(entry["rho_h"], entry["rho_v"])
        out, info = per_item(img, face, density, i)
        dst = os.path.join(args.out, entry["path"])
        os.makedirs(os.path.dirname(dst), exist_ok=True)
        save_image(out, dst)
        entry = dict(entry, sha256=_sha256(dst))
        results.append(entry)
        info.update(path=entry["path"])
    out_manifest = dict(manifest, entries=results)
    out_manifest["provenance"] = dict(manifest.get("provenance", {}), derived_by=args.command)
    with open(os.path.join(args.out, "manifest.json"), "w") as fh:
        json.dump(out_manifest, fh, indent=1, sort_keys=True)
    return results


def cmd_filter(args) -> int:
    cfg = _config(args)
    seed = _seed(args, required=args.algo == "ahgmm")
    thr = _threshold(args, cfg)
    hop = _hopping(args, cfg, seed)
    svgb_kw = dict(cfg.get("svgb", {}))
    svgb_kw.update((k, v) for k, v in (("n_rings", args.rings), ("decay", args.decay))
                   if v is not None)
    svgb = SvgbConfig(**svgb_kw)
    report = {"version": REPORT_VERSION, "command": "filter", "algo": args.algo,
              "threshold": {"rho_h_o": thr.rho_h_o, "rho_v_o": thr.rho_v_o}}
    if seed is not None:
        report["seed_id"] = seed_fingerprint(seed)

    def run(img, face, density, key):
        item_cfg = replace(hop, seed=key) if key is not None else hop
        out, rep = bench.apply_filter(args.algo, img, face, density, thr, item_cfg, svgb,
                                      threads=args.threads,
                                      **({"global_smoothing": not args.no_global}
                                         if args.algo == "ahgmm" else {}))
        info = {"density": _density_dict(density), "gated": gate(density, thr)}
        if rep is not None:
            info.update(rep.to_dict())
        return out, info

    if _is_dataset(args.inp):
        if args.plan_out:
            raise UsageError("--plan-out is only available for single images")
        infos = []

        def item(img, face, density, i):
            key = bench.derive_key(seed, i) if seed is not None else None
            out, info = run(img, face, density, key)
            infos.append(info)
            return out, info

        _batch(args, cfg, item)
        report["items"] = infos
    else:
        img = load_image(args.inp)
        face = _face(args, cfg, img)
        density = _density(args, cfg, face)
        out, info = run(img, face, density, seed)
        save_image(out, args.out)
        report.update(info)
        report["face"] = [face.x, face.y, face.width, face.height]
        if args.plan_out and args.algo == "ahgmm" and info["gated"]:
            plan_for_face(face, density, thr, hop).save(args.plan_out)
        if args.dump_kernel:
            ref = REFERENCE_DENSITY if args.algo == "fgb" else density
            with open(args.dump_kernel, "w") as fh:
                dump_kernel(discretize(optimal_spec(ref, thr)), fh)
    _write_json(args.report, report)
    return 0


def cmd_attack(args) -> int:
    cfg = _config(args)
    seed = _seed(args, required=False)
    thr = _threshold(args, cfg)
    hop = _hopping(args, cfg, None)
    nsr = args.nsr if args.nsr is not None else cfg.get("attack", {}).get("nsr", 1e-4)
    plan = HoppingPlan.load(args.plan) if args.plan else None
    if args.kind == "accurate" and seed is None and plan is None:
        raise UsageError("accurate attack needs --plan or the true --seed")
    report = {"version": REPORT_VERSION, "command": "attack", "kind": args.kind, "nsr": nsr,
              "threshold": {"rho_h_o": thr.rho_h_o, "rho_v_o": thr.rho_v_o}}
    if seed is not None:
        report["seed_id"] = seed_fingerprint(seed)

    def run(img, face, density, key, item_plan):
        info = {"density": _density_dict(density), "gated": gate(density, thr)}
        if not info["gated"]:
            return img, info
        adversary = AdversaryModel(args.kind, seed=key, plan=item_plan)
        out = attack_inverse(img, face, adversary, optimal_spec(density, thr), nsr, hop,
                             global_smoothing=not args.no_global)
        return out, info

    if _is_dataset(args.inp):
        if plan is not None:
            raise UsageError("--plan is only available for single images")
        infos = []

        def item(img, face, density, i):
            key = bench.derive_key(seed, i) if seed is not None else None
            out, info = run(img, face, density, key, None)
            infos.append(info)
            return out, info

        _batch(args, cfg, item)
        report["items"] = infos
    else:
        img = load_image(args.inp)
        face = _face(args, cfg, img)
        density = _density(args, cfg, face)
        out, info = run(img, face, density, seed, plan)
        save_image(out, args.out)
        report.update(info)
    _write_json(args.report, report)
    return 0


def _collect_images(paths) -> list[tuple[str, ImagePlane]]:
    found = []
    for p in paths:
        if os.path.isdir(p):
            names = sorted(n for n in os.listdir(p)
                           if n.lower().endswith((".png", ".pgm", ".ppm", ".jpg", ".jpeg")))
            found += [(os.path.splitext(n)[0], load_image(os.path.join(p, n))) for n in names]
        else:
            found.append((os.path.splitext(os.path.basename(p))[0], load_image(p)))
    return found


def cmd_dataset(args) -> int:
    images = _collect_images(args.src)
    for name, img in images:
        if img.width != SOURCE_SIZE or img.height != SOURCE_SIZE:
            raise UsageError(f"source {name} is {img.width}x{img.height}, "
                             f"need {SOURCE_SIZE}x{SOURCE_SIZE}")
    images += [(f"synth_{i:04d}", f)
               for i, f in enumerate(synthetic_faces(args.synthetic, args.face_seed))]
    if not images:
        raise UsageError("no source images: give --src and/or --synthetic N")
    provenance = {"sources": [n for n, _ in images], "synthetic_seed": args.face_seed,
                  "pitch_synthesis": "label only"}
    mpath = layout_dataset(args.out, images, args.factors, args.pitches, provenance)
    n_entries = len(load_manifest(mpath)["entries"])
    _write_json(args.report, {"version": REPORT_VERSION, "command": "dataset",
                              "manifest": mpath, "entries": n_entries})
    print(f"wrote {n_entries} images and {mpath}")
    return 0


def _image_pairs(ref, test):
    if _is_dataset(ref):
        manifest = load_manifest(os.path.join(ref, "manifest.json"))
        for entry in manifest["entries"]:
            yield (load_image(os.path.join(ref, entry["path"])),
                   load_image(os.path.join(test, entry["path"])))
    else:
        yield load_image(ref), load_image(test)


def cmd_metrics(args) -> int:
    report = {"version": REPORT_VERSION, "command": "metrics"}
    if args.ref or args.test:
        if not (args.ref and args.test):
            raise UsageError("--ref and --test go together")
        pairs = list(_image_pairs(args.ref, args.test))
        err = dataset_mse(pairs)
        report.update(n_images=len(pairs), mse=err,
                      psnr_db=format_db(psnr_from_mse(err, args.r_max)))
    if args.tally:
        tally = read_tally(args.tally)
        report.update(tp=tally.tp, tn=tally.tn, total=tally.total,
                      accuracy=accuracy_from_tally(tally))
    if len(report) == 2:
        raise UsageError("nothing to measure: give --ref/--test and/or --tally")
    if args.report:
        _write_json(args.report, report)
    else:
        json.dump(report, sys.stdout, indent=2, sort_keys=True)
        print()
    return 0


def cmd_bench(args) -> int:
    master = _seed(args, required=False) or bytes(32)
    if args.suite == "psnr-ordering":
        rows = bench.psnr_ordering(args.n, args.rho_o, master, threads=args.threads)
    elif args.suite == "attack-asymmetry":
        rows = [bench.attack_asymmetry(args.n, rho, args.nsr, master) for rho in (0.7, 0.6, 0.5)]
    else:
        rows = bench.timing(args.n, args.rho_o, args.threads)
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
        writer.writeheader()
        writer.writerows(rows)
    finally:
        if args.out:
            fh.close()
    return 0


COMMANDS = {"filter": cmd_filter, "attack": cmd_attack, "dataset": cmd_dataset,
            "metrics": cmd_metrics, "bench": cmd_bench}


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except AhgmmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
