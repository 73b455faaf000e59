import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from thermobar import assemble_generator, build_discretization, reference_config, validate_config  # noqa: E402


def random_config(rng, law):
    L1 = rng.uniform(0.3, 2.0)
    L2 = L1 + rng.uniform(0.3, 2.0)
    L3 = L2 + rng.uniform(0.3, 2.0)
    raw = dict(L1=L1, L2=L2, L3=L3, a=rng.uniform(0.2, 5), b=rng.uniform(0.2, 5),
               m=rng.uniform(0.1, 3), k=rng.uniform(0.1, 3), tau=rng.uniform(0.05, 3), law=law)
    return validate_config(raw)


def make_system(cfg, n=8, **kw):
    n1, n2, n3 = (n, n, n) if np.isscalar(n) else n
    return assemble_generator(cfg, build_discretization(cfg, n1, n2, n3), **kw)


@pytest.fixture(params=["cattaneo", "fourier"])
def law(request):
    return request.param


@pytest.fixture
def r0_sys(law):
    return make_system(reference_config(law), 8)
