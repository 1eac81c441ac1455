"""Two-hop Rayleigh fading model for a surface-assisted downlink.

The surface is split into per-user subsurfaces, each operating either in
transmission or reflection mode.  This module samples the BS-side and
user-side fading vectors, applies per-subsurface phase configurations,
and exposes the Gaussian (central-limit) moments of the phase-aligned
cascaded gain.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Dict, Sequence, Tuple

import numpy as np

from .errors import InvalidParameterError

TRANSMISSION = "transmission"
REFLECTION = "reflection"
ZONES = (TRANSMISSION, REFLECTION)

# Moments of the product of two independent Rayleigh amplitudes with unit
# mean-square: E[|h||g|] = pi/4, Var[|h||g|] = 1 - pi^2/16 (per unit gain).
_MEAN_FACTOR = math.pi / 4.0
_VAR_FACTOR = 1.0 - math.pi**2 / 16.0


def path_gain(distance: float, exponent: float) -> float:
    """Power-law link gain ``distance**(-exponent)``.

    The overall two-hop gain of a BS-surface-user link is the product of
    the two per-hop gains.
    """
    if not distance > 0:
        raise InvalidParameterError(f"distance must be positive, got {distance}")
    if exponent < 0:
        raise InvalidParameterError(f"exponent must be nonnegative, got {exponent}")
    return float(distance) ** (-float(exponent))


@dataclass(frozen=True)
class PathLossParams:
    """Distances and exponents of the two hops serving one user."""

    bs_ris_distance: float
    ris_user_distance: float
    bs_exponent: float = 2.0
    ris_user_exponent: float = 2.0

    def __post_init__(self) -> None:
        if not self.bs_ris_distance > 0:
            raise InvalidParameterError("bs_ris_distance must be positive")
        if not self.ris_user_distance > 0:
            raise InvalidParameterError("ris_user_distance must be positive")
        if self.bs_exponent < 0 or self.ris_user_exponent < 0:
            raise InvalidParameterError("path loss exponents must be nonnegative")

    def bs_gain(self) -> float:
        return path_gain(self.bs_ris_distance, self.bs_exponent)

    def user_gain(self) -> float:
        return path_gain(self.ris_user_distance, self.ris_user_exponent)

    def overall_gain(self) -> float:
        """Composite per-element gain of the cascaded link."""
        return self.bs_gain() * self.user_gain()


@dataclass(frozen=True)
class SubsurfaceAllocation:
    """Per-user element counts and the surface part each user is served by."""

    counts: Tuple[int, ...]
    zones: Tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.counts) != len(self.zones):
            raise InvalidParameterError("counts and zones must have equal length")
        if not self.counts:
            raise InvalidParameterError("allocation needs at least one user")
        for n in self.counts:
            if int(n) != n or n < 0:
                raise InvalidParameterError(f"element count must be a nonnegative integer, got {n}")
        for z in self.zones:
            if z not in ZONES:
                raise InvalidParameterError(f"zone must be one of {ZONES}, got {z!r}")
        object.__setattr__(self, "counts", tuple(int(n) for n in self.counts))

    @property
    def n_users(self) -> int:
        return len(self.counts)

    @property
    def n_transmission(self) -> int:
        return sum(n for n, z in zip(self.counts, self.zones) if z == TRANSMISSION)

    @property
    def n_reflection(self) -> int:
        return sum(n for n, z in zip(self.counts, self.zones) if z == REFLECTION)

    @property
    def n_total(self) -> int:
        return self.n_transmission + self.n_reflection

    def zone_total(self, user: int) -> int:
        """Total element count of the surface part serving ``user``."""
        zone = self.zones[user]
        return self.n_transmission if zone == TRANSMISSION else self.n_reflection

    def co_zone_elements(self, user: int) -> int:
        """Elements of other subsurfaces in the same part (interference size)."""
        return self.zone_total(user) - self.counts[user]

    def co_zone_users(self, user: int) -> Tuple[int, ...]:
        zone = self.zones[user]
        return tuple(i for i, z in enumerate(self.zones) if z == zone and i != user)


@dataclass(frozen=True)
class ChannelRealization:
    """One draw of every fading vector plus the surface phase configuration.

    ``bs_vectors[i]`` is the BS-to-subsurface-i vector (length ``counts[i]``),
    ``user_vectors[(k, i)]`` the subsurface-i-to-user-k vector for every
    subsurface in user k's own zone, and ``phases[i]`` the applied phase of
    each element of subsurface i.
    """

    alloc: SubsurfaceAllocation
    bs_vectors: Tuple[np.ndarray, ...]
    user_vectors: Dict[Tuple[int, int], np.ndarray]
    phases: Tuple[np.ndarray, ...]

    def with_phases(self, user: int, theta: np.ndarray) -> "ChannelRealization":
        new = list(self.phases)
        new[user] = np.asarray(theta, dtype=float)
        return replace(self, phases=tuple(new))


def _complex_normal(rng: np.random.Generator, variance: float, size: int) -> np.ndarray:
    # Circularly symmetric: variance split evenly between the two parts.
    scale = math.sqrt(variance / 2.0)
    return scale * (rng.standard_normal(size) + 1j * rng.standard_normal(size))


def sample_realization(
    alloc: SubsurfaceAllocation,
    path_loss: Sequence[PathLossParams],
    rng: np.random.Generator,
) -> ChannelRealization:
    """Draw all fading vectors for one coherence interval.

    Every BS-side entry is i.i.d. complex Gaussian with per-entry variance
    equal to the BS-hop gain; every user-side entry uses the receiving
    user's own second-hop gain.  Phases start at zero.
    """
    if len(path_loss) != alloc.n_users:
        raise InvalidParameterError("one PathLossParams per user required")
    bs_vectors = tuple(
        _complex_normal(rng, path_loss[i].bs_gain(), alloc.counts[i])
        for i in range(alloc.n_users)
    )
    user_vectors: Dict[Tuple[int, int], np.ndarray] = {}
    for k in range(alloc.n_users):
        gain = path_loss[k].user_gain()
        for i in (k, *alloc.co_zone_users(k)):
            user_vectors[(k, i)] = _complex_normal(rng, gain, alloc.counts[i])
    phases = tuple(np.zeros(n) for n in alloc.counts)
    return ChannelRealization(alloc, bs_vectors, user_vectors, phases)


def align_phases(realization: ChannelRealization, user: int) -> np.ndarray:
    """Phase vector that makes user's own cascade real and maximal.

    Each element's phase cancels the composite phase of its BS-side and
    user-side coefficients, so the subsurface response becomes the sum of
    amplitude products.
    """
    h = realization.bs_vectors[user]
    g = realization.user_vectors[(user, user)]
    theta = -(np.angle(h) + np.angle(g))
    return np.mod(theta, 2.0 * math.pi)


def align_all(realization: ChannelRealization) -> ChannelRealization:
    """Align every subsurface to the user it serves."""
    out = realization
    for k in range(realization.alloc.n_users):
        out = out.with_phases(k, align_phases(realization, k))
    return out


def subsurface_response(realization: ChannelRealization, user: int, subsurface: int) -> complex:
    """Composite coefficient of one subsurface as seen by one user."""
    h = realization.bs_vectors[subsurface]
    g = realization.user_vectors[(user, subsurface)]
    theta = realization.phases[subsurface]
    return complex(np.sum(g * np.exp(1j * theta) * h))


def cascaded_gain(realization: ChannelRealization, user: int) -> float:
    """Magnitude of the user's own (aligned) subsurface response."""
    return abs(subsurface_response(realization, user, user))


def interference_coefficient(realization: ChannelRealization, user: int) -> complex:
    """Sum of the other same-zone subsurface responses seen by ``user``.

    Users alone in their zone get exactly 0j; the opposite part never
    contributes under mode switching.
    """
    total = 0j
    for i in realization.alloc.co_zone_users(user):
        total += subsurface_response(realization, user, i)
    return total


def sample_cascade_batch(bs_gain: float, user_gain: float, elements: int,
                         size: int, rng: np.random.Generator) -> np.ndarray:
    """Batch of aligned cascaded gains, one per realization.

    Law-equivalent to sampling a realization, aligning the user's own
    subsurface and taking :func:`cascaded_gain`: the aligned response is
    the sum of per-element products of the two hop amplitudes, which are
    Rayleigh with scales ``sqrt(gain/2)``.
    """
    if elements == 0:
        return np.zeros(size)
    h = rng.rayleigh(math.sqrt(bs_gain / 2.0), (size, elements))
    g = rng.rayleigh(math.sqrt(user_gain / 2.0), (size, elements))
    return (h * g).sum(axis=1)


def sample_interference_batch(bs_gain: float, user_gain: float, elements: int,
                              size: int, rng: np.random.Generator) -> np.ndarray:
    """Batch of composite same-zone leakage coefficients.

    Each leaking element contributes its BS-side amplitude times a fresh
    circularly symmetric coefficient: the element's phase is aligned to a
    user other than the observer, and rotating the observer's independent
    second-hop coefficient by that phase leaves its law unchanged.  This
    matches :func:`interference_coefficient` on aligned realizations.
    """
    if elements == 0:
        return np.zeros(size, dtype=complex)
    h = rng.rayleigh(math.sqrt(bs_gain / 2.0), (size, elements))
    scale = math.sqrt(user_gain / 2.0)
    g = scale * (rng.standard_normal((size, elements))
                 + 1j * rng.standard_normal((size, elements)))
    return (h * g).sum(axis=1)


def clt_moments(overall_gain: float, elements: int) -> Tuple[float, float]:
    """Mean and variance of the aligned cascaded gain.

    The aligned gain is a sum of ``elements`` i.i.d. products of two
    Rayleigh amplitudes, so its Gaussian limit has mean
    ``(pi/4) * sqrt(overall_gain) * elements`` and variance
    ``(1 - pi^2/16) * overall_gain * elements``.
    """
    if elements < 0:
        raise InvalidParameterError("element count must be nonnegative")
    if elements == 0:
        return 0.0, 0.0
    if not overall_gain > 0:
        raise InvalidParameterError("overall gain must be positive")
    mean = _MEAN_FACTOR * math.sqrt(overall_gain) * elements
    variance = _VAR_FACTOR * overall_gain * elements
    return mean, variance
