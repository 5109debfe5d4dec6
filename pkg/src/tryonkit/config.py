"""Pipeline configuration: backend blocks, skin/ensemble settings and
metric parameters, loadable from a YAML file with documented defaults."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .generate_skin import GenerateSkinConfig
from .tryon import EnsembleConfig

DEFAULT_METRIC_PARAMS = {
    # Skin-exposure ratio the forearm corridors must reach.
    "nor_threshold": 0.35,
    # Forearm corridor radius, fraction of image height.
    "nor_corridor_frac": 0.04,
    # Grid of the flat feature extractor used for distribution distances.
    "fid_grid": 4,
}


@dataclass
class PipelineConfig:
    backends: dict = field(default_factory=dict)
    skin: GenerateSkinConfig = field(default_factory=GenerateSkinConfig)
    ensemble: EnsembleConfig = field(default_factory=EnsembleConfig)
    metric_params: dict = field(default_factory=lambda: dict(DEFAULT_METRIC_PARAMS))
    # Use dataset openpose_json files, when present, instead of the pose backend.
    use_dataset_poses: bool = True
    workers: int = 1

    @classmethod
    def from_dict(cls, d: dict | None) -> "PipelineConfig":
        d = dict(d or {})
        params = dict(DEFAULT_METRIC_PARAMS)
        params.update(d.get("metric_params") or {})
        return cls(
            backends=dict(d.get("backends") or {}),
            skin=GenerateSkinConfig.from_dict(d.get("skin")),
            ensemble=EnsembleConfig.from_dict(d.get("ensemble")),
            metric_params=params,
            use_dataset_poses=bool(d.get("use_dataset_poses", True)),
            workers=int(d.get("workers", 1)),
        )

    def as_dict(self) -> dict:
        return {
            "backends": self.backends,
            "skin": self.skin.as_dict(),
            "ensemble": self.ensemble.as_dict(),
            "metric_params": self.metric_params,
            "use_dataset_poses": self.use_dataset_poses,
            "workers": self.workers,
        }


def load_config(path) -> PipelineConfig:
    data = yaml.safe_load(Path(path).read_text())
    return PipelineConfig.from_dict(data)


def default_config() -> PipelineConfig:
    return PipelineConfig()
