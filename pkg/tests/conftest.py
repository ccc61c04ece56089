import pytest

from punclink import build_standard_code
from punclink.cpm import build_trellis, preset


@pytest.fixture(scope="session")
def hamming():
    return build_standard_code("hamming-7-4")


@pytest.fixture(scope="session")
def toy_tree():
    return build_standard_code("toy-tree")


@pytest.fixture(scope="session")
def code_r23():
    return build_standard_code("standin-artm0-r23-n1024")


@pytest.fixture(scope="session")
def code_r45():
    return build_standard_code("standin-r45-n1024")


@pytest.fixture(scope="session")
def msk_trellis():
    return build_trellis(preset("msk"))


@pytest.fixture(scope="session")
def artm_trellis():
    return build_trellis(preset("artm-like"))
