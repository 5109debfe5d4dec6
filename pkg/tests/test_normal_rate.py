import numpy as np
import pytest

from tryonkit.metrics import DegenerateCaseWarning, NormalRateCase, normal_output_rate
from tryonkit.synthetic import make_person
from tryonkit.types import PoseSkeleton, SleeveClass

SIZE = 48


def _case(person, label=None, case_id=""):
    return NormalRateCase(
        output=person.image,
        pose=person.pose,
        parse=person.parse,
        reference=SleeveClass.SHORT_SLEEVE,
        human_label=label,
        case_id=case_id,
    )


@pytest.fixture(scope="module")
def short_person():
    return make_person(SIZE, SIZE, sleeve=SleeveClass.SHORT_SLEEVE)


@pytest.fixture(scope="module")
def long_person():
    return make_person(SIZE, SIZE, sleeve=SleeveClass.LONG_SLEEVE)


def test_all_human_labeled_normal_is_one(long_person):
    cases = [_case(long_person, label=True, case_id=f"c{i}") for i in range(5)]
    result = normal_output_rate(cases)
    assert result.rate == 1.0
    assert result.normal == result.counted == 5
    assert all(c.source == "human" for c in result.classifications)


def test_exposed_forearms_classify_normal(short_person):
    result = normal_output_rate([_case(short_person)])
    assert result.classifications[0].status == "normal"
    assert all(r >= 0.35 for r in result.classifications[0].arm_ratios.values())


def test_clothed_forearms_classify_abnormal_with_manual_count(long_person):
    result = normal_output_rate([_case(long_person)])
    cls = result.classifications[0]
    assert cls.status == "abnormal"

    # manual oracle: count skin pixels along each forearm corridor by hand
    from tryonkit.skin_tone import detect_skin

    skin = detect_skin(long_person.image).bits
    radius = 0.04 * SIZE
    for side in ("left", "right"):
        ex, ey = long_person.pose.point(f"{side}_elbow")
        wx, wy = long_person.pose.point(f"{side}_wrist")
        seg = np.array([wx - ex, wy - ey])
        seg_sq = float(seg @ seg)
        inside = skin_count = 0
        for y in range(SIZE):
            for x in range(SIZE):
                t = max(0.0, min(1.0, ((x - ex) * seg[0] + (y - ey) * seg[1]) / seg_sq))
                px, py = ex + t * seg[0], ey + t * seg[1]
                if (x - px) ** 2 + (y - py) ** 2 <= radius**2:
                    inside += 1
                    skin_count += int(skin[y, x])
        ratio = skin_count / inside
        assert cls.arm_ratios[side] == pytest.approx(ratio, abs=1e-12)
        assert ratio < 0.35


def test_forty_case_labeled_fixture_exact_hand_count(short_person, long_person):
    cases = []
    cases += [_case(long_person, label=True, case_id=f"hn{i}") for i in range(15)]
    cases += [_case(short_person, label=False, case_id=f"ha{i}") for i in range(10)]
    cases += [_case(short_person, case_id=f"an{i}") for i in range(8)]
    cases += [_case(long_person, case_id=f"aa{i}") for i in range(7)]
    result = normal_output_rate(cases)
    # hand count: 15 human-normal + 8 automated-normal out of 40
    assert result.counted == 40
    assert result.normal == 23
    assert result.rate == 23 / 40


def test_rate_invariant_under_reordering(short_person, long_person):
    cases = (
        [_case(short_person, case_id=f"s{i}") for i in range(4)]
        + [_case(long_person, case_id=f"l{i}") for i in range(3)]
        + [_case(long_person, label=True, case_id="x")]
    )
    forward = normal_output_rate(cases)
    backward = normal_output_rate(list(reversed(cases)))
    assert forward.rate == backward.rate
    assert forward.normal == backward.normal
    assert forward.counted == backward.counted


def test_human_label_overrides_automated_rule(long_person):
    # the automated rule would say abnormal; the label wins
    result = normal_output_rate([_case(long_person, label=True)])
    assert result.classifications[0].status == "normal"
    assert result.classifications[0].source == "human"
    assert result.rate == 1.0


def test_degenerate_pose_excluded_from_denominator(short_person):
    degenerate = NormalRateCase(
        output=short_person.image,
        pose=PoseSkeleton(np.zeros((18, 3))),
        parse=None,
        reference=SleeveClass.SHORT_SLEEVE,
        case_id="deg",
    )
    with pytest.warns(DegenerateCaseWarning):
        result = normal_output_rate([_case(short_person), degenerate])
    assert result.counted == 1
    assert result.rate == 1.0
    statuses = {c.case_id: c.status for c in result.classifications}
    assert statuses["deg"] == "excluded"


def test_reference_long_sleeve_rejected(short_person):
    with pytest.raises(ValueError):
        NormalRateCase(
            output=short_person.image,
            pose=short_person.pose,
            parse=None,
            reference=SleeveClass.LONG_SLEEVE,
        )


def test_empty_case_list():
    result = normal_output_rate([])
    assert result.rate == 0.0 and result.counted == 0
