import pytest

from fixture_data import build_fixture_dataset, fixture_config
from tryonkit.backends import build_backends
from tryonkit.generate_skin import GenerateSkinConfig
from tryonkit.synthetic import make_garment, make_person
from tryonkit.types import SleeveClass

SIZE = 64


@pytest.fixture(scope="session")
def person_long():
    return make_person(SIZE, SIZE, sleeve=SleeveClass.LONG_SLEEVE)


@pytest.fixture(scope="session")
def person_short():
    return make_person(SIZE, SIZE, sleeve=SleeveClass.SHORT_SLEEVE)


@pytest.fixture(scope="session")
def person_sleeveless():
    return make_person(SIZE, SIZE, sleeve=SleeveClass.SLEEVELESS)


@pytest.fixture(scope="session")
def garment_red():
    return make_garment(SIZE, SIZE, color=(204, 51, 51), stripe=(240, 240, 240))


@pytest.fixture()
def backends():
    return build_backends({})


@pytest.fixture()
def skin_cfg():
    return GenerateSkinConfig(
        target_sleeve=SleeveClass.SHORT_SLEEVE,
        limb_margin=1,
        min_tone_samples=20,
        blend_strength=0.5,
    )


@pytest.fixture(scope="session")
def dataset_root(tmp_path_factory):
    root = tmp_path_factory.mktemp("fixture-dataset")
    return build_fixture_dataset(root)


@pytest.fixture()
def pipeline_config():
    return fixture_config()
