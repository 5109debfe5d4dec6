import numpy as np
import pytest

from tryonkit.masking import (
    DegeneratePoseWarning,
    MaskSpec,
    MissingRegionWarning,
    build_agnostic_mask,
    build_skin_inpaint_mask,
    default_limb_margin,
    mask_spec_for,
)
from tryonkit.types import (
    BinaryMask,
    DEFAULT_LABEL_SCHEMA,
    GarmentCategory,
    ParseMap,
    PoseSkeleton,
    SleeveClass,
    dilate,
)

UPPER = 4
FACE = 11
L_ARM, R_ARM = 14, 15


def _pose(joints: dict) -> PoseSkeleton:
    """Pose with the named joints valid and everything else confidence 0."""
    from tryonkit.types import COCO18_KEYPOINT_NAMES

    pts = np.zeros((18, 3))
    for name, (x, y) in joints.items():
        pts[COCO18_KEYPOINT_NAMES.index(name)] = (x, y, 1.0)
    return PoseSkeleton(pts)


def _vertical_arm_pose(with_wrists=True):
    joints = {
        "right_shoulder": (10.0, 10.0),
        "right_elbow": (10.0, 25.0),
        "left_shoulder": (38.0, 10.0),
        "left_elbow": (38.0, 25.0),
    }
    if with_wrists:
        joints["right_wrist"] = (10.0, 38.0)
        joints["left_wrist"] = (38.0, 38.0)
    return _pose(joints)


def _parse(labels):
    return ParseMap(labels.astype(np.int32), dict(DEFAULT_LABEL_SCHEMA))


# ---------------------------------------------------------------------------
# Agnostic mask


def test_agnostic_missing_region_warns_and_returns_empty():
    labels = np.zeros((16, 16), dtype=np.int32)  # background only
    spec = mask_spec_for(GarmentCategory.UPPER, limb_margin=0)
    with pytest.warns(MissingRegionWarning):
        mask = build_agnostic_mask(_parse(labels), _vertical_arm_pose(), spec)
    assert mask.is_empty()


def test_agnostic_exact_label_copy():
    labels = np.zeros((20, 20), dtype=np.int32)
    labels[5:15, 5:15] = UPPER
    spec = MaskSpec(
        category=GarmentCategory.UPPER,
        include_labels=frozenset({"upper_clothes"}),
        limb_margin=0,
        include_arms=False,
        include_neck=False,
    )
    mask = build_agnostic_mask(_parse(labels), _vertical_arm_pose(), spec)
    assert np.array_equal(mask.bits, labels == UPPER)


def test_agnostic_union_then_dilate_oracle():
    labels = np.zeros((24, 24), dtype=np.int32)
    labels[4:10, 8:16] = UPPER
    labels[10:20, 2:5] = R_ARM
    labels[10:20, 19:22] = L_ARM
    spec = MaskSpec(
        category=GarmentCategory.UPPER,
        include_labels=frozenset({"upper_clothes"}),
        limb_margin=2,
        include_arms=True,
        include_neck=False,
    )
    mask = build_agnostic_mask(_parse(labels), _vertical_arm_pose(), spec)

    # independent oracle: set union, then brute-force neighborhood scan
    union = np.isin(labels, [UPPER, R_ARM, L_ARM])
    expected = np.zeros_like(union)
    h, w = union.shape
    for y in range(h):
        for x in range(w):
            y0, y1 = max(0, y - 2), min(h, y + 3)
            x0, x1 = max(0, x - 2), min(w, x + 3)
            expected[y, x] = union[y0:y1, x0:x1].any()
    assert np.array_equal(mask.bits, expected)


def test_agnostic_margin_equals_dilated_margin_zero(person_long):
    for margin in (1, 3):
        spec0 = mask_spec_for(GarmentCategory.UPPER, limb_margin=0)
        spec_m = mask_spec_for(GarmentCategory.UPPER, limb_margin=margin)
        m0 = build_agnostic_mask(person_long.parse, person_long.pose, spec0)
        mm = build_agnostic_mask(person_long.parse, person_long.pose, spec_m)
        assert np.array_equal(mm.bits, dilate(m0, margin).bits)


def test_agnostic_never_covers_face_or_hair(person_long, person_short, person_sleeveless):
    for person in (person_long, person_short, person_sleeveless):
        for category in GarmentCategory:
            spec = mask_spec_for(category, limb_margin=0)
            mask = build_agnostic_mask(person.parse, person.pose, spec)
            protected = person.parse.mask_for("face", "hair").bits
            assert not (mask.bits & protected).any()


def test_agnostic_deterministic(person_long):
    spec = mask_spec_for(GarmentCategory.UPPER, limb_margin=2)
    a = build_agnostic_mask(person_long.parse, person_long.pose, spec)
    b = build_agnostic_mask(person_long.parse, person_long.pose, spec)
    assert np.array_equal(a.bits, b.bits)


def test_mask_spec_validation():
    with pytest.raises(ValueError):
        MaskSpec(category=GarmentCategory.UPPER, include_labels=frozenset())
    with pytest.raises(ValueError):
        MaskSpec(
            category=GarmentCategory.UPPER,
            include_labels=frozenset({"upper_clothes"}),
            limb_margin=-1,
        )
    with pytest.raises(ValueError):
        mask_spec_for(GarmentCategory.UPPER, strategy="unknown")


def test_vitonhd_strategy_is_upper_only():
    spec = mask_spec_for(GarmentCategory.LOWER, strategy="vitonhd", limb_margin=0)
    assert spec.include_labels == frozenset({"upper_clothes"})
    spec_dc = mask_spec_for(GarmentCategory.LOWER, strategy="dresscode", limb_margin=0)
    assert "pants" in spec_dc.include_labels


def test_default_limb_margin_scales_with_height():
    assert default_limb_margin(1024) == 8
    assert default_limb_margin(512) == 4
    assert default_limb_margin(2048) == 16


# ---------------------------------------------------------------------------
# Skin-inpaint mask


def test_skin_mask_rejects_long_sleeve_target(person_long):
    with pytest.raises(ValueError):
        build_skin_inpaint_mask(person_long.parse, person_long.pose, SleeveClass.LONG_SLEEVE)


def test_skin_mask_sleeveless_equals_arms_minus_wrist_disks():
    # straight vertical arms labeled as skin, nothing else
    labels = np.zeros((48, 48), dtype=np.int32)
    labels[10:41, 8:13] = R_ARM
    labels[10:41, 36:41] = L_ARM
    pose = _vertical_arm_pose(with_wrists=True)
    mask = build_skin_inpaint_mask(_parse(labels), pose, SleeveClass.SLEEVELESS)

    # oracle: direct label selection minus per-pixel rasterized disks
    expected = np.isin(labels, [L_ARM, R_ARM])
    radius = 0.05 * 48
    for wx, wy in ((10.0, 38.0), (38.0, 38.0)):
        for y in range(48):
            for x in range(48):
                if (x - wx) ** 2 + (y - wy) ** 2 <= radius**2:
                    expected[y, x] = False
    assert np.array_equal(mask.bits, expected)


def test_skin_mask_all_confidence_zero_falls_back_to_full_arms():
    labels = np.zeros((48, 48), dtype=np.int32)
    labels[10:41, 8:13] = R_ARM
    labels[10:41, 36:41] = L_ARM
    pose = PoseSkeleton(np.zeros((18, 3)))
    with pytest.warns(DegeneratePoseWarning):
        mask = build_skin_inpaint_mask(_parse(labels), pose, SleeveClass.SHORT_SLEEVE)
    assert np.array_equal(mask.bits, np.isin(labels, [L_ARM, R_ARM]))


def test_skin_mask_clothing_half_plane_clip_without_arm_labels():
    # sleeves painted as clothing along both arm corridors, no arm labels;
    # wrists invalid so no hand disks interfere
    labels = np.zeros((48, 48), dtype=np.int32)
    labels[10:41, 8:13] = UPPER
    labels[10:41, 36:41] = UPPER
    pose = _vertical_arm_pose(with_wrists=False)
    mask = build_skin_inpaint_mask(_parse(labels), pose, SleeveClass.SHORT_SLEEVE)

    # oracle: half-plane clip of clothing labels per arm; sleeve line at the
    # mid upper-arm (y = 17.5 for both arms here)
    ys = np.arange(48)[:, None]
    expected = (labels == UPPER) & (ys >= 17.5)
    assert np.array_equal(mask.bits, expected)


def test_skin_mask_ignores_torso_clothing():
    labels = np.zeros((48, 48), dtype=np.int32)
    labels[10:41, 8:13] = UPPER  # right sleeve
    labels[12:30, 20:28] = UPPER  # torso, far from both arm corridors
    pose = _vertical_arm_pose(with_wrists=False)
    mask = build_skin_inpaint_mask(_parse(labels), pose, SleeveClass.SHORT_SLEEVE)
    assert not (mask.bits[:, 20:28]).any()
    assert mask.bits[:, 8:13].any()


def test_skin_mask_per_arm_degradation():
    labels = np.zeros((48, 48), dtype=np.int32)
    labels[10:41, 8:13] = R_ARM
    labels[10:41, 36:41] = L_ARM
    joints = {
        "right_shoulder": (10.0, 10.0),
        "right_elbow": (10.0, 25.0),
        # left shoulder/elbow missing -> left arm degrades to full region
    }
    with pytest.warns(DegeneratePoseWarning, match="left"):
        mask = build_skin_inpaint_mask(_parse(labels), _pose(joints), SleeveClass.SHORT_SLEEVE)
    assert mask.bits[10:41, 36:41].all()  # full left arm
    assert not mask.bits[10:17, 8:13].any()  # right arm clipped above the hem
    assert mask.bits[18:41, 8:13].all()


def test_skin_mask_monotone_sleeveless_covers_short(person_long, person_short):
    for person in (person_long, person_short):
        short = build_skin_inpaint_mask(person.parse, person.pose, SleeveClass.SHORT_SLEEVE)
        sleeveless = build_skin_inpaint_mask(person.parse, person.pose, SleeveClass.SLEEVELESS)
        assert (short.bits <= sleeveless.bits).all()
        assert sleeveless.count > short.count


def test_skin_mask_never_covers_face_or_hair(person_long, person_short, person_sleeveless):
    for person in (person_long, person_short, person_sleeveless):
        for target in (SleeveClass.SHORT_SLEEVE, SleeveClass.SLEEVELESS):
            for margin in (0, 2):
                mask = build_skin_inpaint_mask(person.parse, person.pose, target, margin=margin)
                protected = person.parse.mask_for("face", "hair").bits
                assert not (mask.bits & protected).any()


def test_skin_mask_deterministic(person_long):
    a = build_skin_inpaint_mask(person_long.parse, person_long.pose, SleeveClass.SHORT_SLEEVE)
    b = build_skin_inpaint_mask(person_long.parse, person_long.pose, SleeveClass.SHORT_SLEEVE)
    assert np.array_equal(a.bits, b.bits)
