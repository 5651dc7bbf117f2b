import pytest

from nmd.fixtures import secdi_full_span, secdi_model, secdi_model_extended

EXPOSURE_NAMED = (
    "MAX(SecDI.ExposureResidualMaturity [SecDI.SecurityID = SEC_GteeADJ.SecurityID "
    "AND SecDI1.LinkFlag = 1])"
)
EXPOSURE_A1 = (
    "=MAX(IF(SECDI!$B$5:$B$754=SEC_GTEEADJ!$B5,"
    "IF(SECDI1!$C$5:$C$754=1,SECDI!$L$5:$L$754)))"
)


@pytest.fixture
def fix_a():
    return secdi_model()


@pytest.fixture
def fix_a_extended():
    return secdi_model_extended()


@pytest.fixture
def fix_b():
    return secdi_full_span()
