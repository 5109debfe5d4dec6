"""Command-line entry points.

Subcommands: mask, tone, generate-skin, tryon, tryon-batch,
metrics {fid,ssim,lpips,nor}, evaluate. Run `tryonkit <cmd> -h` for the
full flag list of each command.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import io as tio
from .backends import build_backends, run_parser, run_pose
from .config import PipelineConfig, load_config
from .generate_skin import GenerateSkinConfig, generate_skin
from .harness import build_index, run_eval
from .masking import (
    build_agnostic_mask,
    build_skin_inpaint_mask,
    mask_spec_for,
    overlay_mask,
)
from .metrics import (
    GaussianStats,
    IdentityLayerExtractor,
    NormalRateCase,
    PatchMeanExtractor,
    fid,
    lpips,
    normal_output_rate,
    read_features,
    ssim,
    write_features,
)
from .skin_tone import detect_skin, estimate_tone
from .tryon import EnsembleConfig, tryon, tryon_direct
from .types import GarmentCategory, SleeveClass


def _pipeline_config(args) -> PipelineConfig:
    if getattr(args, "config", None):
        return load_config(args.config)
    return PipelineConfig()


def _load_parse_pose(args, config, img):
    """Parse/pose from files when given, otherwise from the configured backends."""
    backends = build_backends(config.backends)
    parse = tio.load_parse(args.parse) if args.parse else run_parser(backends.parser, img)
    pose = tio.load_pose(args.pose) if args.pose else run_pose(backends.pose, img)
    return parse, pose


def _cmd_mask(args) -> int:
    config = _pipeline_config(args)
    img = tio.load_image(args.person)
    parse, pose = _load_parse_pose(args, config, img)
    if args.mode == "agnostic":
        spec = mask_spec_for(
            GarmentCategory(args.category), args.strategy, limb_margin=args.margin
        )
        mask = build_agnostic_mask(parse, pose, spec)
    else:
        mask = build_skin_inpaint_mask(
            parse, pose, SleeveClass(args.target), margin=args.margin
        )
    out = Path(args.out)
    tio.save_mask(mask, out / "mask.png")
    tio.save_image(overlay_mask(img, mask), out / "overlay.png")
    print(f"mask: {mask.count} px -> {out / 'mask.png'}")
    return 0


def _cmd_tone(args) -> int:
    img = tio.load_image(args.image)
    restrict = None
    if args.parse:
        parse = tio.load_parse(args.parse)
        restrict = parse.mask_for(*args.restrict.split(","))
    skin = detect_skin(img, restrict_to=restrict)
    estimate = estimate_tone(img, skin, min_samples=args.min_samples)
    if args.mask_out:
        tio.save_mask(skin, args.mask_out)
    print(json.dumps(estimate.as_dict(), indent=2))
    return 0


def _cmd_generate_skin(args) -> int:
    config = _pipeline_config(args)
    skin_cfg = config.skin
    skin_cfg.target_sleeve = SleeveClass(args.target)
    if args.seed is not None:
        skin_cfg.seed = args.seed
    if args.steps is not None:
        skin_cfg.steps = args.steps
    if args.margin is not None:
        skin_cfg.limb_margin = args.margin

    backends = build_backends(config.backends)
    src = tio.load_image(args.person)
    result = generate_skin(src, skin_cfg, backends)

    out = Path(args.out)
    tio.save_image(result.preinpainted, out / "preinpainted.png")
    tio.save_mask(result.inpaint_mask, out / "mask.png")
    tio.save_pose(result.pose, out / "pose.json")
    manifest = {
        "config": skin_cfg.as_dict(),
        "tone": result.tone.as_dict(),
        "warnings": result.warnings,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True))
    print(f"preinpainted -> {out / 'preinpainted.png'} ({len(result.warnings)} warnings)")
    return 0


def _run_one_tryon(person_path, garment_path, category, config, out, direct, seed):
    backends = build_backends(config.backends)
    person = tio.load_image(person_path)
    garment = tio.load_image(garment_path)
    ensemble = EnsembleConfig(
        mask_source=config.ensemble.mask_source,
        synth_source=config.ensemble.synth_source,
        category=GarmentCategory(category),
        seed=config.ensemble.seed if seed is None else seed,
    )
    run = tryon_direct if direct else tryon
    result = run(person, garment, ensemble, config.skin, backends)
    out = Path(out)
    tio.save_image(result.output, out / "output.png")
    tio.save_mask(result.agnostic_mask, out / "agnostic_mask.png")
    if result.stage1 is not None:
        tio.save_image(result.stage1.preinpainted, out / "preinpainted.png")
    (out / "manifest.json").write_text(json.dumps(result.manifest, indent=2, sort_keys=True))
    return result


def _cmd_tryon(args) -> int:
    config = _pipeline_config(args)
    result = _run_one_tryon(
        args.person, args.garment, args.category, config, args.out, args.direct, args.seed
    )
    print(f"output -> {Path(args.out) / 'output.png'}")
    for w in result.manifest.get("warnings", []):
        print(f"warning: {w}")
    return 0


def _cmd_tryon_batch(args) -> int:
    config = _pipeline_config(args)
    lines = [
        line.strip() for line in Path(args.pairs).read_text().splitlines() if line.strip()
    ]
    failures = 0
    for i, line in enumerate(lines):
        fields = line.split("\t")
        if len(fields) != 3:
            print(f"line {i}: expected person<TAB>garment<TAB>category")
            failures += 1
            continue
        person, garment, category = fields
        item_out = Path(args.out) / f"{i:04d}_{Path(person).stem}"
        try:
            _run_one_tryon(person, garment, category, config, item_out, args.direct, args.seed)
            print(f"[{i}] ok -> {item_out}")
        except Exception as exc:  # per-item isolation, batch continues
            failures += 1
            print(f"[{i}] failed: {exc}")
    print(f"{len(lines) - failures}/{len(lines)} items succeeded")
    return 0 if failures < len(lines) or not lines else 1


def _dir_features(directory, grid):
    extractor = PatchMeanExtractor(grid=grid)
    paths = sorted(Path(directory).glob("*.png"))
    if not paths:
        raise SystemExit(f"no PNG files under {directory}")
    return np.array([extractor.features(tio.load_image(p)) for p in paths])


def _cmd_metrics_fid(args) -> int:
    if args.features_real and args.features_gen:
        real = read_features(args.features_real)
        gen = read_features(args.features_gen)
    elif args.real_dir and args.gen_dir:
        real = _dir_features(args.real_dir, args.grid)
        gen = _dir_features(args.gen_dir, args.grid)
        if args.dump_real:
            write_features(args.dump_real, real)
        if args.dump_gen:
            write_features(args.dump_gen, gen)
    else:
        raise SystemExit("need --features-real/--features-gen or --real-dir/--gen-dir")
    value = fid(GaussianStats.from_features(real), GaussianStats.from_features(gen))
    print(f"fid: {value:.6f}")
    return 0


def _paired_pngs(real_dir, gen_dir):
    gen_paths = sorted(Path(gen_dir).glob("*.png"))
    if not gen_paths:
        raise SystemExit(f"no PNG files under {gen_dir}")
    pairs = []
    for gen_path in gen_paths:
        real_path = Path(real_dir) / gen_path.name
        if not real_path.exists():
            raise SystemExit(f"missing counterpart {real_path}")
        pairs.append((tio.load_image(real_path), tio.load_image(gen_path)))
    return pairs


def _cmd_metrics_ssim(args) -> int:
    if args.x and args.y:
        print(f"ssim: {ssim(tio.load_image(args.x), tio.load_image(args.y)):.6f}")
        return 0
    pairs = _paired_pngs(args.real_dir, args.gen_dir)
    values = [ssim(a, b) for a, b in pairs]
    print(f"ssim: {np.mean(values):.6f} (n={len(values)})")
    return 0


def _cmd_metrics_lpips(args) -> int:
    extractor = IdentityLayerExtractor()
    if args.x and args.y:
        print(f"lpips: {lpips(tio.load_image(args.x), tio.load_image(args.y), extractor):.6f}")
        return 0
    pairs = _paired_pngs(args.real_dir, args.gen_dir)
    values = [lpips(a, b, extractor) for a, b in pairs]
    print(f"lpips: {np.mean(values):.6f} (n={len(values)})")
    return 0


def _cmd_metrics_nor(args) -> int:
    outputs = sorted(Path(args.outputs).glob("*.png"))
    if not outputs:
        raise SystemExit(f"no PNG files under {args.outputs}")
    labels = {}
    if args.labels:
        labels = json.loads(Path(args.labels).read_text())
    cases = []
    for path in outputs:
        pose_path = Path(args.poses) / f"{path.stem}_keypoints.json"
        if not pose_path.exists():
            raise SystemExit(f"missing pose file {pose_path}")
        cases.append(
            NormalRateCase(
                output=tio.load_image(path),
                pose=tio.load_pose(pose_path),
                parse=None,
                reference=SleeveClass(args.reference),
                human_label=labels.get(path.stem),
                case_id=path.stem,
            )
        )
    result = normal_output_rate(cases, threshold=args.threshold)
    for c in result.classifications:
        print(f"{c.case_id}: {c.status} ({c.source})")
    print(f"normal output rate: {result.normal}/{result.counted} = {100 * result.rate:.1f}%")
    return 0


def _cmd_evaluate(args) -> int:
    config = _pipeline_config(args)
    index = build_index(args.data, pairing=args.pairing, seed=args.seed)
    metric_names = tuple(m for m in args.metrics.split(",") if m)
    report, records = run_eval(
        index,
        config,
        args.out,
        metric_names=metric_names,
        workers=args.workers,
    )
    failed = sum(1 for r in records if r.status == "failed")
    print((Path(args.out) / "report.txt").read_text())
    print(f"{len(records) - failed}/{len(records)} items ok; run dir: {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tryonkit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mask", help="build an agnostic or skin-inpaint mask")
    p.add_argument("--person", required=True)
    p.add_argument("--parse", help="precomputed parse PNG (else backend)")
    p.add_argument("--pose", help="precomputed pose JSON (else backend)")
    p.add_argument("--config", help="pipeline config YAML")
    p.add_argument("--mode", choices=["agnostic", "skin"], default="agnostic")
    p.add_argument("--category", default="upper", choices=[c.value for c in GarmentCategory])
    p.add_argument("--strategy", default="dresscode", choices=["dresscode", "vitonhd"])
    p.add_argument("--target", default="short_sleeve", choices=["short_sleeve", "sleeveless"])
    p.add_argument("--margin", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_mask)

    p = sub.add_parser("tone", help="estimate the skin tone of an image")
    p.add_argument("--image", required=True)
    p.add_argument("--parse", help="parse PNG used to restrict detection")
    p.add_argument("--restrict", default="face", help="comma-separated label names")
    p.add_argument("--min-samples", type=int, default=500)
    p.add_argument("--mask-out", help="write the detected-skin mask PNG here")
    p.add_argument("--config", help="pipeline config YAML")
    p.set_defaults(func=_cmd_tone)

    p = sub.add_parser("generate-skin", help="stage 1: remove sleeves, restore skin")
    p.add_argument("--person", required=True)
    p.add_argument("--target", required=True, choices=["short_sleeve", "sleeveless"])
    p.add_argument("--out", required=True)
    p.add_argument("--config", help="pipeline config YAML")
    p.add_argument("--seed", type=int)
    p.add_argument("--steps", type=int)
    p.add_argument("--margin", type=int)
    p.set_defaults(func=_cmd_generate_skin)

    p = sub.add_parser("tryon", help="two-stage try-on for one person/garment pair")
    p.add_argument("--person", required=True)
    p.add_argument("--garment", required=True)
    p.add_argument("--category", required=True, choices=[c.value for c in GarmentCategory])
    p.add_argument("--config", help="pipeline config YAML")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--direct", action="store_true", help="skip stage 1 (baseline path)")
    p.set_defaults(func=_cmd_tryon)

    p = sub.add_parser("tryon-batch", help="try-on over a TSV list of pairs")
    p.add_argument("--pairs", required=True, help="person<TAB>garment<TAB>category per line")
    p.add_argument("--config", help="pipeline config YAML")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--direct", action="store_true")
    p.set_defaults(func=_cmd_tryon_batch)

    metrics = sub.add_parser("metrics", help="score images or feature dumps")
    msub = metrics.add_subparsers(dest="metric", required=True)

    p = msub.add_parser("fid", help="Frechet distance between two sets")
    p.add_argument("--features-real")
    p.add_argument("--features-gen")
    p.add_argument("--real-dir")
    p.add_argument("--gen-dir")
    p.add_argument("--grid", type=int, default=4)
    p.add_argument("--dump-real", help="also write real features to this dump file")
    p.add_argument("--dump-gen", help="also write generated features to this dump file")
    p.set_defaults(func=_cmd_metrics_fid)

    p = msub.add_parser("ssim", help="structural similarity")
    p.add_argument("--x")
    p.add_argument("--y")
    p.add_argument("--real-dir")
    p.add_argument("--gen-dir")
    p.set_defaults(func=_cmd_metrics_ssim)

    p = msub.add_parser("lpips", help="perceptual distance (identity features)")
    p.add_argument("--x")
    p.add_argument("--y")
    p.add_argument("--real-dir")
    p.add_argument("--gen-dir")
    p.set_defaults(func=_cmd_metrics_lpips)

    p = msub.add_parser("nor", help="normal output rate over a directory")
    p.add_argument("--outputs", required=True, help="directory of output PNGs")
    p.add_argument("--poses", required=True, help="directory of <stem>_keypoints.json")
    p.add_argument("--reference", default="short_sleeve", choices=["short_sleeve", "sleeveless"])
    p.add_argument("--labels", help="JSON file {stem: true/false} of human labels")
    p.add_argument("--threshold", type=float, default=0.35)
    p.set_defaults(func=_cmd_metrics_nor)

    p = sub.add_parser("evaluate", help="batch evaluation over a dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--config", help="pipeline config YAML")
    p.add_argument("--out", required=True)
    p.add_argument("--metrics", default="fid,ssim,lpips,nor")
    p.add_argument("--pairing", default="paired", choices=["paired", "unpaired"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_evaluate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
