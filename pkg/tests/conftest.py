import numpy as np
import pytest

from dharper.model import BetaClass, derive_params, params_from_split

FIG_ALPHA = 0.1545


@pytest.fixture
def fig1_rational():
    """Fig. 1 parameter set with beta = 1/3."""
    return derive_params(params_from_split(0.3, BetaClass.rational(1, 3),
                                           alpha=FIG_ALPHA))


@pytest.fixture
def fig1_irrational():
    return derive_params(params_from_split(0.3, BetaClass.golden(),
                                           alpha=FIG_ALPHA))


@pytest.fixture
def fig3_irrational():
    return derive_params(params_from_split(0.45, BetaClass.golden(),
                                           alpha=FIG_ALPHA))


@pytest.fixture
def fig3_rational():
    return derive_params(params_from_split(0.45, BetaClass.rational(1, 3),
                                           alpha=FIG_ALPHA))


def rng(seed=0):
    return np.random.Generator(np.random.Philox(seed))
