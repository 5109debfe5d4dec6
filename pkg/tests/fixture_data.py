"""Shared 64x64 fixture dataset used by harness/CLI tests and goldens."""

from tryonkit.config import PipelineConfig
from tryonkit.synthetic import make_garment, make_person, write_dataset
from tryonkit.types import SleeveClass

SIZE = 64


def fixture_persons() -> dict:
    return {
        "a_long_upper": make_person(SIZE, SIZE, sleeve=SleeveClass.LONG_SLEEVE),
        "b_short_upper": make_person(SIZE, SIZE, sleeve=SleeveClass.SHORT_SLEEVE),
        "c_long_lower": make_person(SIZE, SIZE, sleeve=SleeveClass.LONG_SLEEVE, lower="skirt"),
        "d_long_dress": make_person(SIZE, SIZE, sleeve=SleeveClass.LONG_SLEEVE),
    }


def fixture_garments() -> dict:
    return {
        "a_long_upper": make_garment(SIZE, SIZE, color=(204, 51, 51), stripe=(240, 240, 240)),
        "b_short_upper": make_garment(SIZE, SIZE, color=(60, 160, 90)),
        "c_long_lower": make_garment(SIZE, SIZE, color=(40, 45, 60)),
        "d_long_dress": make_garment(SIZE, SIZE, color=(120, 60, 160), stripe=(250, 220, 90)),
    }


FIXTURE_METADATA = {
    "a_long_upper": {
        "category": "upper",
        "input_sleeve": "long_sleeve",
        "reference_sleeve": "short_sleeve",
    },
    "b_short_upper": {
        "category": "upper",
        "input_sleeve": "short_sleeve",
        "reference_sleeve": "short_sleeve",
    },
    "c_long_lower": {"category": "lower"},
    "d_long_dress": {
        "category": "dress",
        "input_sleeve": "long_sleeve",
        "reference_sleeve": "sleeveless",
        "normal_label": True,
    },
}


def build_fixture_dataset(root):
    write_dataset(root, fixture_persons(), fixture_garments(), FIXTURE_METADATA)
    return root


def fixture_config() -> PipelineConfig:
    """Pipeline config scaled down to the 64x64 fixtures."""
    return PipelineConfig.from_dict(
        {
            "skin": {
                "target_sleeve": "short_sleeve",
                "limb_margin": 1,
                "min_tone_samples": 20,
                "blend_strength": 0.5,
            },
            "ensemble": {"mask_source": "dresscode", "synth_source": "vitonhd"},
        }
    )
