import pytest

import spanforge as sf


@pytest.fixture(scope="session")
def bal4():
    return sf.parse("OR(AND(x1,x2),AND(x3,x4))")


@pytest.fixture(scope="session")
def skew4():
    return sf.parse("AND(OR(AND(x1,x2),x3),x4)")


@pytest.fixture(scope="session")
def nested7():
    # depth-3 mixed shape exercising both gate orders
    return sf.parse("OR(AND(OR(AND(x1,x2),x3),x4),AND(x5,OR(x6,x7)))")
