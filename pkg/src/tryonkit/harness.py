"""Dataset indexing, batch evaluation runs and comparison grids.

The dataset layout mirrors the public try-on conventions (image/, cloth/,
image-parse-v3/, openpose_json/, optional metadata.json), so real data
drops in unchanged. Runs persist one JSON record per item plus a report;
everything needed to rebuild the report lives in those records.
"""

from __future__ import annotations

import json
import os
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import io as tio
from .backends import BackendError, StubPose, build_backends
from .config import PipelineConfig
from .metrics import (
    GaussianStats,
    IdentityLayerExtractor,
    MetricReport,
    ModelMetrics,
    NormalRateCase,
    NormalRateEntry,
    PatchMeanExtractor,
    fid,
    lpips,
    normal_output_rate,
    ssim,
)
from .tryon import tryon
from .types import GarmentCategory, RasterImage, SleeveClass

DEFAULT_METRICS = ("fid", "ssim", "lpips", "nor")


class MissingFile(FileNotFoundError):
    """A file referenced by the dataset layout does not exist."""


class EmptyDataset(Exception):
    """The dataset root holds no usable items."""


class EmptyInput(ValueError):
    """A grid was requested for zero items."""


@dataclass
class DatasetItem:
    item_id: str
    person_path: str
    garment_path: str
    parse_path: str | None = None
    pose_path: str | None = None
    category: str = "upper"
    input_sleeve: str | None = None
    reference_sleeve: str | None = None
    normal_label: bool | None = None

    def as_dict(self) -> dict:
        return asdict(self)


@dataclass
class DatasetIndex:
    root: str
    pairing: str
    items: list

    def __len__(self) -> int:
        return len(self.items)


def derangement(n: int, seed: int) -> list:
    """Seeded single-cycle permutation (Sattolo): no fixed points for n >= 2."""
    if n < 2:
        raise ValueError("a derangement needs at least 2 elements")
    perm = list(range(n))
    rng = random.Random(seed)
    for i in range(n - 1, 0, -1):
        j = rng.randrange(i)
        perm[i], perm[j] = perm[j], perm[i]
    return perm


def build_index(root, pairing: str = "paired", seed: int = 0) -> DatasetIndex:
    """Index the dataset; paired keeps each person's own garment, unpaired
    assigns garments by a seeded derangement."""
    if pairing not in ("paired", "unpaired"):
        raise ValueError(f"pairing must be paired|unpaired, got {pairing!r}")
    root = Path(root)
    image_dir = root / "image"
    ids = sorted(p.stem for p in image_dir.glob("*.png")) if image_dir.is_dir() else []
    if not ids:
        raise EmptyDataset(f"no person images under {image_dir}")
    if pairing == "unpaired" and len(ids) < 2:
        raise EmptyDataset("unpaired pairing needs at least 2 items")

    metadata = {}
    meta_path = root / "metadata.json"
    if meta_path.exists():
        metadata = json.loads(meta_path.read_text())

    garment_ids = ids
    if pairing == "unpaired":
        perm = derangement(len(ids), seed)
        garment_ids = [ids[perm[i]] for i in range(len(ids))]

    items = []
    for item_id, garment_id in zip(ids, garment_ids):
        garment_path = root / "cloth" / f"{garment_id}.png"
        if not garment_path.exists():
            raise MissingFile(str(garment_path))
        parse_path = root / "image-parse-v3" / f"{item_id}.png"
        pose_path = root / "openpose_json" / f"{item_id}_keypoints.json"
        meta = metadata.get(item_id, {})
        items.append(
            DatasetItem(
                item_id=item_id,
                person_path=str(root / "image" / f"{item_id}.png"),
                garment_path=str(garment_path),
                parse_path=str(parse_path) if parse_path.exists() else None,
                pose_path=str(pose_path) if pose_path.exists() else None,
                category=meta.get("category", "upper"),
                input_sleeve=meta.get("input_sleeve"),
                reference_sleeve=meta.get("reference_sleeve"),
                normal_label=meta.get("normal_label"),
            )
        )
    return DatasetIndex(root=str(root), pairing=pairing, items=items)


@dataclass
class RunRecord:
    item_id: str
    status: str = "ok"
    output_path: str | None = None
    mask_path: str | None = None
    manifest: dict = field(default_factory=dict)
    metrics: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    wall_time: float = 0.0
    error: str | None = None

    def as_dict(self) -> dict:
        return asdict(self)


def _atomic_write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _nor_eligible(item: DatasetItem) -> bool:
    return item.input_sleeve == SleeveClass.LONG_SLEEVE.value and item.reference_sleeve in (
        SleeveClass.SHORT_SLEEVE.value,
        SleeveClass.SLEEVELESS.value,
    )


def _eval_item(args) -> dict:
    """Evaluate one item (runs inside a worker: builds its own backends)."""
    config_dict, item_dict, out_dir, metric_names = args
    config = PipelineConfig.from_dict(config_dict)
    item = DatasetItem(**item_dict)
    out_dir = Path(out_dir)
    started = time.perf_counter()
    record = RunRecord(item_id=item.item_id)
    try:
        backends = build_backends(config.backends)
        if config.use_dataset_poses and item.pose_path:
            backends.pose = StubPose(skeleton=tio.load_pose(item.pose_path))
        person = tio.load_image(item.person_path)
        garment = tio.load_image(item.garment_path)
        ensemble = config.ensemble
        ensemble.category = GarmentCategory(item.category)
        result = tryon(person, garment, ensemble, config.skin, backends)

        output_path = out_dir / "outputs" / f"{item.item_id}.png"
        mask_path = out_dir / "outputs" / f"{item.item_id}.mask.png"
        tio.save_image(result.output, output_path)
        tio.save_mask(result.agnostic_mask, mask_path)
        record.output_path = str(output_path)
        record.mask_path = str(mask_path)
        record.manifest = result.manifest
        record.warnings = list(result.manifest.get("warnings", []))

        grid = int(config.metric_params.get("fid_grid", 4))
        extractor = PatchMeanExtractor(grid=grid)
        if "fid" in metric_names:
            record.metrics["features_real"] = extractor.features(person).tolist()
            record.metrics["features_gen"] = extractor.features(result.output).tolist()
        if "ssim" in metric_names:
            record.metrics["ssim"] = ssim(result.output, person)
        if "lpips" in metric_names:
            record.metrics["lpips"] = lpips(result.output, person, IdentityLayerExtractor())
        if "nor" in metric_names and _nor_eligible(item):
            case = NormalRateCase(
                output=result.output,
                pose=result.stage1.pose if result.stage1 else backends.pose.estimate(person),
                parse=None,
                reference=SleeveClass(item.reference_sleeve),
                human_label=item.normal_label,
                case_id=item.item_id,
            )
            nor = normal_output_rate(
                [case],
                threshold=float(config.metric_params.get("nor_threshold", 0.35)),
                corridor_frac=float(config.metric_params.get("nor_corridor_frac", 0.04)),
            )
            record.metrics["nor_status"] = nor.classifications[0].status
            record.metrics["nor_source"] = nor.classifications[0].source
            record.metrics["nor_ratios"] = dict(nor.classifications[0].arm_ratios)
    except (BackendError, ValueError, OSError, KeyError) as exc:
        record.status = "failed"
        record.error = f"{type(exc).__name__}: {exc}"
    record.wall_time = time.perf_counter() - started
    _atomic_write_text(
        out_dir / "records" / f"{item.item_id}.json",
        json.dumps(record.as_dict(), indent=2, sort_keys=True),
    )
    return record.as_dict()


def aggregate_records(records, pairing: str, run_name: str, metric_names) -> MetricReport:
    """Build the report purely from per-item records (no hidden state)."""
    ok = [r for r in records if r["status"] == "ok"]
    row = ModelMetrics(name=run_name)
    metadata = {
        "pairing": pairing,
        "items": len(records),
        "failed": len(records) - len(ok),
        "metrics": ",".join(metric_names),
    }

    if "fid" in metric_names and len(ok) >= 2:
        real = np.array([r["metrics"]["features_real"] for r in ok])
        gen = np.array([r["metrics"]["features_gen"] for r in ok])
        value = fid(GaussianStats.from_features(real), GaussianStats.from_features(gen))
        if pairing == "paired":
            row.paired_fid = value
        else:
            row.unpaired_fid = value
    if pairing == "paired" and ok:
        if "ssim" in metric_names:
            row.ssim = float(np.mean([r["metrics"]["ssim"] for r in ok]))
        if "lpips" in metric_names:
            row.lpips = float(np.mean([r["metrics"]["lpips"] for r in ok]))

    normal_rates = []
    if "nor" in metric_names:
        statuses = [r["metrics"]["nor_status"] for r in ok if "nor_status" in r["metrics"]]
        counted = sum(1 for s in statuses if s in ("normal", "abnormal"))
        if counted:
            normal = sum(1 for s in statuses if s == "normal")
            normal_rates.append(
                NormalRateEntry(name=run_name, normal=normal, counted=counted)
            )
    return MetricReport(rows=[row], normal_rates=normal_rates, metadata=metadata)


def run_eval(
    index: DatasetIndex,
    config: PipelineConfig,
    out_dir,
    metric_names=DEFAULT_METRICS,
    run_name: str | None = None,
    workers: int | None = None,
):
    """Run the pipeline + metrics over an index.

    Per-item failures are recorded and the run continues; the run itself
    fails only when every item fails. Returns (MetricReport, [RunRecord]).
    """
    out_dir = Path(out_dir)
    metric_names = tuple(metric_names)
    run_name = run_name or (
        f"mask={config.ensemble.mask_source},synth={config.ensemble.synth_source}"
    )
    workers = workers or config.workers

    jobs = [
        (config.as_dict(), item.as_dict(), str(out_dir), metric_names) for item in index.items
    ]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            record_dicts = list(pool.map(_eval_item, jobs))
    else:
        record_dicts = [_eval_item(job) for job in jobs]

    records = [RunRecord(**d) for d in record_dicts]
    if records and all(r.status == "failed" for r in records):
        raise RuntimeError(f"every item failed; first error: {records[0].error}")

    report = aggregate_records(record_dicts, index.pairing, run_name, metric_names)
    report.metadata["config"] = config.as_dict()
    _atomic_write_text(out_dir / "report.json", json.dumps(report.to_dict(), indent=2, sort_keys=True))
    from .metrics import render_report

    _atomic_write_text(out_dir / "report.txt", render_report(report) + "\n")

    rows = []
    for item, record in zip(index.items, records):
        if record.status != "ok":
            continue
        rows.append(
            (
                tio.load_image(item.person_path),
                tio.load_image(item.garment_path),
                [tio.load_image(record.output_path)],
            )
        )
    if rows:
        tio.save_image(emit_grid(rows), out_dir / "grid.png")
    return report, records


def compare_configs(
    index: DatasetIndex,
    base_config: PipelineConfig,
    variants,
    out_dir,
    metric_names=DEFAULT_METRICS,
):
    """Run one evaluation per ensemble variant and merge rows into a single
    comparison report. `variants` is a list of (name, ensemble_overrides)."""
    out_dir = Path(out_dir)
    rows, normal_rates = [], []
    for name, overrides in variants:
        cfg_dict = base_config.as_dict()
        cfg_dict["ensemble"] = {**cfg_dict["ensemble"], **overrides}
        variant_cfg = PipelineConfig.from_dict(cfg_dict)
        report, _ = run_eval(
            index, variant_cfg, out_dir / name, metric_names=metric_names, run_name=name
        )
        rows.extend(report.rows)
        normal_rates.extend(report.normal_rates)
    merged = MetricReport(
        rows=rows,
        normal_rates=normal_rates,
        metadata={"pairing": index.pairing, "variants": [name for name, _ in variants]},
    )
    _atomic_write_text(out_dir / "comparison.json", json.dumps(merged.to_dict(), indent=2, sort_keys=True))
    return merged


def resize_nearest(img: RasterImage, width: int, height: int) -> RasterImage:
    """Deterministic nearest-neighbor resize."""
    map_r = (np.arange(height) * img.height) // height
    map_c = (np.arange(width) * img.width) // width
    return RasterImage(img.pixels[map_r][:, map_c])


def emit_grid(
    rows,
    cell_width: int | None = None,
    cell_height: int | None = None,
    gutter: int = 4,
    background=(255, 255, 255),
) -> RasterImage:
    """Comparison grid: one row per item, columns input | garment | outputs.

    Every cell is scaled to a common size; total width is
    ncols * (cell_w + gutter) - gutter and likewise for the height.
    """
    rows = list(rows)
    if not rows:
        raise EmptyInput("no grid rows")
    ncols = 2 + max(len(outputs) for _, _, outputs in rows)
    cell_w = cell_width or rows[0][0].width
    cell_h = cell_height or rows[0][0].height
    nrows = len(rows)
    total_w = ncols * (cell_w + gutter) - gutter
    total_h = nrows * (cell_h + gutter) - gutter
    canvas = np.empty((total_h, total_w, 3), dtype=np.uint8)
    canvas[:] = np.asarray(background, dtype=np.uint8)
    for r, (person, garment, outputs) in enumerate(rows):
        cells = [person, garment, *outputs]
        y = r * (cell_h + gutter)
        for c, cell in enumerate(cells):
            x = c * (cell_w + gutter)
            scaled = resize_nearest(cell, cell_w, cell_h)
            canvas[y : y + cell_h, x : x + cell_w] = scaled.pixels
    return RasterImage(canvas)
