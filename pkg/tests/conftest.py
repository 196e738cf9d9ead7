import numpy as np
import pytest

from imcflab import SphereGrid, TimeGrid, build_delta
from imcflab.rotsym import FamilyParams, make_profile, reparam_to_imcf_time

T_LN4 = 2.0 * np.log(2.0)


@pytest.fixture(scope="session")
def small_sphere():
    return SphereGrid(16, 32)


@pytest.fixture(scope="session")
def small_times():
    return TimeGrid(1.0, 65)


@pytest.fixture(scope="session")
def flat_small(small_sphere, small_times):
    return build_delta(1.0, small_sphere, small_times)


@pytest.fixture(scope="session")
def flat_ln4(small_sphere):
    return build_delta(1.0, small_sphere, TimeGrid(T_LN4, 129))


@pytest.fixture(scope="session")
def schwarzschild_unit():
    """m = 0.2, r0 = 1, horizon T = 1."""
    prof = make_profile(FamilyParams(kind="schwarzschild", r0=1.0, m=0.2),
                        (0.0, 1.6), n=2049)
    return reparam_to_imcf_time(prof, SphereGrid(16, 32), TimeGrid(1.0, 129))


@pytest.fixture(scope="session")
def schwarzschild_heavy():
    """m = 1, inner radius 3, leaves between f = 3 and f = 6."""
    prof = make_profile(FamilyParams(kind="schwarzschild", r0=3.0, m=1.0),
                        (0.0, 4.5), n=4097)
    return reparam_to_imcf_time(prof, SphereGrid(16, 32), TimeGrid(T_LN4, 129))
