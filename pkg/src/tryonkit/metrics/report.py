"""Report structures and renderers.

The quantitative table has one row per model/configuration with paired
FID / SSIM / LPIPS plus unpaired FID; the silhouette section lists
normal/abnormal counts and percentages per model. Values can come from a
measurement run or be supplied externally (e.g. published figures), so
the formats are reusable without any measurement claim.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path


@dataclass
class ModelMetrics:
    name: str
    paired_fid: float | None = None
    ssim: float | None = None
    lpips: float | None = None
    unpaired_fid: float | None = None


@dataclass
class NormalRateEntry:
    name: str
    normal: int | None = None
    counted: int | None = None
    rate: float | None = None  # fraction in [0, 1]; derived from counts if absent

    def percent(self) -> float | None:
        if self.rate is not None:
            return 100.0 * self.rate
        if self.normal is not None and self.counted:
            return 100.0 * self.normal / self.counted
        return None


@dataclass
class MetricReport:
    rows: list = field(default_factory=list)
    normal_rates: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "rows": [asdict(r) for r in self.rows],
            "normal_rates": [asdict(n) for n in self.normal_rates],
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "MetricReport":
        return cls(
            rows=[ModelMetrics(**r) for r in d.get("rows", [])],
            normal_rates=[NormalRateEntry(**n) for n in d.get("normal_rates", [])],
            metadata=dict(d.get("metadata", {})),
        )

    def save(self, path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True))

    @classmethod
    def load(cls, path) -> "MetricReport":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _fmt(value, digits) -> str:
    return "-" if value is None else f"{value:.{digits}f}"


def render_quant_table(report: MetricReport) -> str:
    """Model | paired FID / SSIM / LPIPS | unpaired FID, aligned plain text."""
    header = f"{'Model':<22} {'FID':>8} {'SSIM':>8} {'LPIPS':>8} {'uFID':>8}"
    rule = "-" * len(header)
    lines = [header, rule]
    for row in report.rows:
        lines.append(
            f"{row.name:<22} {_fmt(row.paired_fid, 2):>8} {_fmt(row.ssim, 4):>8} "
            f"{_fmt(row.lpips, 4):>8} {_fmt(row.unpaired_fid, 2):>8}"
        )
    if len(lines) == 2:
        lines.append("(no rows)")
    return "\n".join(lines)


def render_normal_rates(report: MetricReport) -> str:
    """Normal-output-rate section: counts and percentage per model."""
    header = f"{'Model':<22} {'normal':>8} {'abnormal':>9} {'rate':>8}"
    rule = "-" * len(header)
    lines = [header, rule]
    for entry in report.normal_rates:
        pct = entry.percent()
        pct_s = "-" if pct is None else f"{pct:.1f}%"
        if entry.normal is not None and entry.counted is not None:
            normal_s = str(entry.normal)
            abnormal_s = str(entry.counted - entry.normal)
        else:
            normal_s = abnormal_s = "-"
        lines.append(f"{entry.name:<22} {normal_s:>8} {abnormal_s:>9} {pct_s:>8}")
    if len(lines) == 2:
        lines.append("(no entries)")
    return "\n".join(lines)


def render_report(report: MetricReport) -> str:
    parts = ["== Quantitative comparison ==", render_quant_table(report)]
    if report.normal_rates:
        parts += ["", "== Normal output rate ==", render_normal_rates(report)]
    if report.metadata:
        parts += ["", "== Run metadata =="]
        parts += [f"{k}: {report.metadata[k]}" for k in sorted(report.metadata)]
    return "\n".join(parts)
