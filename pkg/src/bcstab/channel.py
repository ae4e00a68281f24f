"""Physical-layer model: decoding-success probabilities for two downlink users.

Everything is linear scale (no dB). Channel power gains are unit-mean
exponential (Rayleigh envelope squared), constant within a slot and drawn
independently across slots. The four probabilities that matter downstream
are collected in :class:`SuccessProfile`: per user, the success probability
when its packet is sent alone and when both users' packets share the slot.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from warnings import warn

import numpy as np

__all__ = [
    "Decoding",
    "PowerScheme",
    "SuccessProfile",
    "SystemParams",
    "FadingDraw",
    "MonteCarloProfile",
    "InvalidParameterError",
    "InvalidProfileError",
    "snr_success",
    "sinr_success",
    "layered_decode_success",
    "solo_success",
    "ian_both_success",
    "sc_both_success_user1",
    "adaptive_solo_success",
    "build_profile",
    "mc_estimate_profile",
]


class InvalidParameterError(ValueError):
    """A physical or protocol parameter is outside its valid domain."""


class InvalidProfileError(ValueError):
    """A success-probability profile violates its consistency constraints."""


class Decoding(str, Enum):
    """How a receiver handles the other user's layer when both transmit."""

    GENERIC = "generic"
    INTERFERENCE_AS_NOISE = "ian"
    SUCCESSIVE_DECODING = "sc"


class PowerScheme(str, Enum):
    """Fixed per-queue powers, or full power to the only busy queue."""

    FIXED = "fixed"
    QUEUE_ADAPTIVE = "adaptive"


# Cross-field slack for validating p_both <= p_solo on supplied profiles.
_PROFILE_TOL = 1e-12


@dataclass(frozen=True)
class SuccessProfile:
    """The four decoding-success probabilities that determine the region.

    ``p1_solo``/``p2_solo`` apply when only that user's packet occupies the
    slot; ``p1_both``/``p2_both`` when both packets are superposed. Sharing
    the slot can only hurt, so ``p_both <= p_solo`` per user.
    """

    p1_solo: float
    p2_solo: float
    p1_both: float
    p2_both: float

    def __post_init__(self):
        for name in ("p1_solo", "p2_solo", "p1_both", "p2_both"):
            v = float(getattr(self, name))
            if math.isnan(v) or not (0.0 <= v <= 1.0):
                raise InvalidProfileError(f"{name}={v!r} is not a probability")
            object.__setattr__(self, name, v)
        if self.p1_both > self.p1_solo + _PROFILE_TOL:
            raise InvalidProfileError(
                f"p1_both={self.p1_both} exceeds p1_solo={self.p1_solo}"
            )
        if self.p2_both > self.p2_solo + _PROFILE_TOL:
            raise InvalidProfileError(
                f"p2_both={self.p2_both} exceeds p2_solo={self.p2_solo}"
            )

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.p1_solo, self.p2_solo, self.p1_both, self.p2_both)


@dataclass(frozen=True)
class FadingDraw:
    """Channel power gains of both links for one slot."""

    g1: float
    g2: float

    def __post_init__(self):
        if self.g1 < 0.0 or self.g2 < 0.0:
            raise InvalidParameterError("channel power gains must be >= 0")


@dataclass(frozen=True)
class SystemParams:
    """All physical and protocol constants for one operating point.

    ``gamma1``/``gamma2`` are the SNR/SINR decoding thresholds (linear),
    ``d1``/``d2`` the link distances, ``alpha`` the pathloss exponent.
    ``p1 + p2`` must equal the total budget ``p_total``; under the
    queue-adaptive scheme the split only applies while both queues are
    busy and a lone busy queue gets the full budget.
    """

    gamma1: float
    gamma2: float
    d1: float
    d2: float
    alpha: float
    p_total: float
    p1: float
    p2: float
    decoding: Decoding = Decoding.INTERFERENCE_AS_NOISE
    power_scheme: PowerScheme = PowerScheme.FIXED
    generic_profile: SuccessProfile | None = None

    def __post_init__(self):
        object.__setattr__(self, "decoding", Decoding(self.decoding))
        object.__setattr__(self, "power_scheme", PowerScheme(self.power_scheme))
        for name in ("gamma1", "gamma2", "d1", "d2", "alpha", "p_total"):
            if not getattr(self, name) > 0.0:
                raise InvalidParameterError(f"{name} must be strictly positive")
        if self.p1 < 0.0 or self.p2 < 0.0:
            raise InvalidParameterError("per-queue powers must be >= 0")
        if abs(self.p1 + self.p2 - self.p_total) > 1e-12 * self.p_total:
            raise InvalidParameterError(
                f"p1 + p2 = {self.p1 + self.p2!r} does not match p_total={self.p_total!r}"
            )
        if self.decoding is Decoding.GENERIC:
            if self.generic_profile is None:
                raise InvalidParameterError("generic decoding requires generic_profile")
        elif self.generic_profile is not None:
            raise InvalidParameterError(
                "generic_profile is only meaningful with generic decoding"
            )
        if self.decoding is Decoding.SUCCESSIVE_DECODING and self.d1 > self.d2:
            # Successive decoding assumes receiver 1 has the better channel;
            # the formulas stay valid, so this is advisory only.
            warn(
                "successive decoding models user 1 as the stronger receiver, "
                f"but d1={self.d1} > d2={self.d2}",
                stacklevel=2,
            )

    def solo_power(self, user: int) -> float:
        """Transmit power used when only queue ``user`` is busy."""
        if self.power_scheme is PowerScheme.QUEUE_ADAPTIVE:
            return self.p_total
        return self.p1 if _check_user(user) == 1 else self.p2


def _check_user(user: int) -> int:
    if user not in (1, 2):
        raise InvalidParameterError(f"user must be 1 or 2, got {user!r}")
    return user


def _exp_term(exponent: float) -> float:
    # exponent is >= 0 here; past ~700 the result underflows anyway, so
    # short-circuit to an exact 0.0 instead of relying on libm behaviour.
    if exponent > 700.0:
        return 0.0
    return math.exp(-exponent)


def snr_success(gamma: float, dist: float, alpha: float, power: float) -> float:
    """P[power * g * dist**-alpha >= gamma] with g ~ Exp(1).

    This is the interference-free outage complement of a Rayleigh link.
    """
    if power <= 0.0:
        raise InvalidParameterError(f"transmit power must be positive, got {power!r}")
    return _exp_term(gamma * dist**alpha / power)


def sinr_success(gamma: float, dist: float, alpha: float, p_own: float, p_other: float) -> float:
    """Success probability of one layer with the other treated as noise.

    The SINR ``p_own*g*d^-a / (1 + p_other*g*d^-a)`` saturates at
    ``p_own/p_other`` as the gain grows, so the event is infeasible and the
    probability exactly 0.0 whenever ``p_own <= gamma * p_other``.
    """
    margin = p_own - gamma * p_other
    if margin <= 0.0:
        return 0.0
    return _exp_term(gamma * dist**alpha / margin)


def layered_decode_success(
    gamma_own: float,
    gamma_peer: float,
    dist: float,
    alpha: float,
    p_own: float,
    p_peer: float,
) -> float:
    """Joint success of peel-then-decode at the stronger receiver.

    The receiver first decodes the peer layer treating its own as noise,
    removes it, then decodes its own layer interference-free. Which of the
    two sub-events binds depends on the power split:

    * ``p_peer <= gamma_peer * p_own``: the peer layer is never decodable,
      probability 0.
    * moderate ``p_peer``: the peer-layer SINR event binds.
    * large ``p_peer`` (above ``p_own * gamma_peer * (1 + gamma_own) / gamma_own``):
      the own-layer SNR event binds.

    The two closed-form branches agree at the crossover.
    """
    if gamma_own <= 0.0:
        raise InvalidParameterError("gamma_own must be positive (regime split undefined at 0)")
    if p_peer <= gamma_peer * p_own:
        return 0.0
    if p_peer * gamma_own <= p_own * gamma_peer * (1.0 + gamma_own):
        return sinr_success(gamma_peer, dist, alpha, p_peer, p_own)
    return snr_success(gamma_own, dist, alpha, p_own)


def solo_success(params: SystemParams, user: int, power: float) -> float:
    """Success probability when only queue ``user`` transmits, at ``power``."""
    if _check_user(user) == 1:
        return snr_success(params.gamma1, params.d1, params.alpha, power)
    return snr_success(params.gamma2, params.d2, params.alpha, power)


def ian_both_success(params: SystemParams, user: int) -> float:
    """Both-queues success for ``user`` when interference is treated as noise."""
    if _check_user(user) == 1:
        return sinr_success(params.gamma1, params.d1, params.alpha, params.p1, params.p2)
    return sinr_success(params.gamma2, params.d2, params.alpha, params.p2, params.p1)


def sc_both_success_user1(params: SystemParams) -> float:
    """Both-queues success for user 1 under superposition + successive decoding."""
    return layered_decode_success(
        params.gamma1, params.gamma2, params.d1, params.alpha, params.p1, params.p2
    )


def adaptive_solo_success(params: SystemParams, user: int) -> float:
    """Solo success under the queue-adaptive scheme: the full budget is used."""
    if params.power_scheme is not PowerScheme.QUEUE_ADAPTIVE:
        raise InvalidParameterError("adaptive_solo_success requires the adaptive power scheme")
    if _check_user(user) == 1:
        return snr_success(params.gamma1, params.d1, params.alpha, params.p_total)
    return snr_success(params.gamma2, params.d2, params.alpha, params.p_total)


def _solo_or_zero(params: SystemParams, user: int) -> float:
    # A zero per-queue power is a degenerate but legal configuration; the
    # link then never succeeds rather than being a parameter error.
    power = params.solo_power(user)
    if power <= 0.0:
        return 0.0
    return solo_success(params, user, power)


def build_profile(params: SystemParams) -> SuccessProfile:
    """Assemble the four success probabilities for the configured scheme."""
    if params.decoding is Decoding.GENERIC:
        return params.generic_profile

    p1_solo = _solo_or_zero(params, 1)
    p2_solo = _solo_or_zero(params, 2)
    p2_both = ian_both_success(params, 2)
    if params.decoding is Decoding.INTERFERENCE_AS_NOISE:
        p1_both = ian_both_success(params, 1)
    else:
        p1_both = sc_both_success_user1(params)
    return SuccessProfile(p1_solo, p2_solo, p1_both, p2_both)


@dataclass(frozen=True)
class MonteCarloProfile:
    """Sampled estimates of the four success probabilities.

    Unlike :class:`SuccessProfile` the estimates carry sampling noise, so no
    cross-field ordering is enforced. ``se_*`` are binomial standard errors
    ``sqrt(p*(1-p)/draws)`` evaluated at the estimates.
    """

    p1_solo: float
    p2_solo: float
    p1_both: float
    p2_both: float
    se_p1_solo: float
    se_p2_solo: float
    se_p1_both: float
    se_p2_both: float
    draws: int

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.p1_solo, self.p2_solo, self.p1_both, self.p2_both)

    def se_tuple(self) -> tuple[float, float, float, float]:
        return (self.se_p1_solo, self.se_p2_solo, self.se_p1_both, self.se_p2_both)


_MC_CHUNK = 1_000_000


def mc_estimate_profile(params: SystemParams, draws: int, seed: int) -> MonteCarloProfile:
    """Estimate the success profile by sampling fading and testing raw events.

    This is the independent cross-check of the closed forms: per draw it
    evaluates the SNR/SINR/joint inequalities directly on exponential gains
    instead of going through any rearranged threshold. Deterministic for a
    given seed; draws are consumed in fixed-size chunks.
    """
    if draws < 1:
        raise InvalidParameterError("draws must be >= 1")
    if params.decoding is Decoding.GENERIC:
        raise InvalidParameterError("generic profiles have no channel model to sample")

    dinv1 = params.d1 ** -params.alpha
    dinv2 = params.d2 ** -params.alpha
    ps1 = params.solo_power(1)
    ps2 = params.solo_power(2)
    sc = params.decoding is Decoding.SUCCESSIVE_DECODING

    rng = np.random.default_rng(seed)
    counts = np.zeros(4, dtype=np.int64)
    left = draws
    while left > 0:
        n = min(left, _MC_CHUNK)
        g1 = rng.exponential(1.0, n)
        g2 = rng.exponential(1.0, n)
        u1 = g1 * dinv1
        u2 = g2 * dinv2
        counts[0] += np.count_nonzero(ps1 * u1 >= params.gamma1)
        counts[1] += np.count_nonzero(ps2 * u2 >= params.gamma2)
        if sc:
            both1 = (params.p2 * u1 / (1.0 + params.p1 * u1) >= params.gamma2) & (
                params.p1 * u1 >= params.gamma1
            )
        else:
            both1 = params.p1 * u1 / (1.0 + params.p2 * u1) >= params.gamma1
        counts[2] += np.count_nonzero(both1)
        counts[3] += np.count_nonzero(params.p2 * u2 / (1.0 + params.p1 * u2) >= params.gamma2)
        left -= n

    est = counts / float(draws)
    se = np.sqrt(est * (1.0 - est) / draws)
    return MonteCarloProfile(*est.tolist(), *se.tolist(), draws)
