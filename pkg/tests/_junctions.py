"""Random junction data shared by the coupling and acceptance tests."""

import numpy as np

from lfblood.boundary import EdgeTrace
from lfblood.coupling import Endpoint
from lfblood.model import make_vessel_params
from lfblood.physics import flux, lambda_bound, pressure_inverse


def random_params(rng):
    return make_vessel_params(E=rng.uniform(1e6, 4e6), h0=0.26, nu=0.5,
                              A0=rng.uniform(3.0, 9.0), rho=1.06)


def endpoint(U, params):
    U = np.asarray(U, float)
    return Endpoint(EdgeTrace(U, flux(U, params)), params)


def near_coupled_endpoints(rng, count=2):
    """Endpoints whose traces scatter around a common pressure and flow.

    Cell data next to a node differ from the coupled state by a
    discretisation error; here that error is up to 0.5 kPa (5e3 dyn/cm^2) and 20 cm^3/s.
    """
    p_star = rng.uniform(-1e4, 6e4)
    q_star = rng.uniform(-100.0, 400.0)
    out = []
    for _ in range(count):
        prm = random_params(rng)
        A = pressure_inverse(p_star + rng.uniform(-5e3, 5e3), prm)
        out.append(endpoint([A, q_star + rng.uniform(-20.0, 20.0)], prm))
    lam = rng.uniform(1.0, 1.5) * lambda_bound([e.trace.U for e in out],
                                               [e.params for e in out])
    return out, lam


def scattered_endpoints(rng):
    """Independent traces; the pressure jump across the node can be large."""
    out = []
    for _ in range(2):
        prm = random_params(rng)
        out.append(endpoint([prm.A0 * rng.uniform(0.8, 1.3), rng.uniform(-100.0, 100.0)], prm))
    lam = rng.uniform(1.0, 1.5) * lambda_bound([e.trace.U for e in out],
                                               [e.params for e in out])
    return out, lam
