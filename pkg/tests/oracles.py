"""Independent reference computations shared by the test modules.

Everything here is built from first principles (pattern enumeration,
density quadrature, Gaussian identities) rather than from the package's
own formula paths, so agreement is evidence and not tautology.
"""

import itertools
import math

import numpy as np
from scipy.integrate import quad
from scipy.special import erfc

from starnoma.analytic import UserAnalyticParams


def decision_region_oracle(params: UserAnalyticParams, phi: float, snr: float) -> float:
    """Exhaustive interferer enumeration with quadrature tail integration.

    Patterns come straight from itertools, the decision-axis noise
    deviation from the physical variances (half the complex
    noise-plus-leakage power lands on the decision axis), and the tail
    mass from integrating the Gaussian density.
    """
    alloc = params.alloc
    k, K = params.index, params.n_users
    amps = [math.sqrt(a * alloc.power) for a in alloc.coefficients]
    noise_var = alloc.power / snr
    leak_var = params.overall_gain * params.co_zone_elements * alloc.power
    sigma = math.sqrt((noise_var + leak_var) / 2.0)

    def tail(threshold: float) -> float:
        pdf = lambda w: math.exp(-w * w / (2 * sigma * sigma)) / (
            sigma * math.sqrt(2 * math.pi))
        val, _ = quad(pdf, -np.inf, -threshold, epsabs=1e-14, epsrel=1e-12,
                      limit=300)
        return val

    total = 0.0
    patterns = list(itertools.product((1, -1), repeat=K - k - 1))
    for signs in patterns:
        m = amps[k] + sum(s * a for s, a in zip(signs, amps[k + 1:]))
        total += tail(phi * m)
    return total / len(patterns)


def probit_oracle(params: UserAnalyticParams, snr: float) -> float:
    """Full-line Gaussian average of the exact-tail mixture.

    Uses the identity E[Q(t X)] = Q(t mu / sqrt(1 + t^2 v)) for Gaussian X;
    valid as an oracle when the gain distribution has negligible mass below
    zero and the upper truncation is immaterial.
    """
    mu, v = params.gain_moments()
    alloc = params.alloc
    k, K = params.index, params.n_users
    amps = [math.sqrt(a * alloc.power) for a in alloc.coefficients]
    eff = 2.0 * snr / (1.0 + params.overall_gain * params.co_zone_elements
                       * snr / alloc.power)
    total = 0.0
    patterns = list(itertools.product((1, -1), repeat=K - k - 1))
    for signs in patterns:
        m = amps[k] + sum(s * a for s, a in zip(signs, amps[k + 1:]))
        t = m * math.sqrt(eff)
        total += 0.5 * erfc(t * mu / math.sqrt(1.0 + t * t * v) / math.sqrt(2.0))
    return total / len(patterns)
