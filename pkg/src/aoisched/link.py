"""Per-slot link model: outage probabilities, harvesting, fading sampler.

Closed forms assume independent Rayleigh fading, i.e. exponentially
distributed channel power gains ``omega_n`` with mean ``1/lambda_n``.  A
scheduled transmission succeeds when its achievable rate reaches the target
``r_bar``, which is equivalent to its SINR reaching ``beta = 2**r_bar - 1``.
Unscheduled devices fail by convention (outage probability exactly 1), as
does any device asked to transmit with zero power.

The Monte Carlo estimator draws raw channel gains and replays the same SINR
thresholds, giving an oracle for the closed forms that shares no algebra
with them beyond the rate condition itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .config import DerivedParams

__all__ = [
    "WET",
    "OMA",
    "NOMA",
    "WET_OMA",
    "SCHEME_TAGS",
    "Scheme",
    "OutagePair",
    "SlotOutcome",
    "McOutage",
    "outage_oma",
    "outage_noma",
    "outage_wet_oma",
    "outage_pair",
    "mean_harvest",
    "noma_decoding_order",
    "mc_outage_estimate",
    "sample_slot_outcome",
]

WET = "wet"
OMA = "oma"
NOMA = "noma"
WET_OMA = "wet+oma"
SCHEME_TAGS = (WET, OMA, NOMA, WET_OMA)


@dataclass(frozen=True)
class Scheme:
    """Transmission scheme tag plus the served device where applicable.

    ``device`` is 1 or 2 for OMA and WET+OMA, None for WET (serves nobody)
    and NOMA (serves both).
    """

    tag: str
    device: int | None = None

    def __post_init__(self):
        if self.tag not in SCHEME_TAGS:
            raise ValueError(f"unknown scheme tag {self.tag!r}")
        if self.tag in (OMA, WET_OMA):
            if self.device not in (1, 2):
                raise ValueError(f"{self.tag} requires device 1 or 2, got {self.device}")
        elif self.device is not None:
            raise ValueError(f"{self.tag} does not take a device index")

    @property
    def wet_active(self) -> bool:
        return self.tag in (WET, WET_OMA)

    def transmitting(self, device: int) -> bool:
        if self.tag == NOMA:
            return True
        return self.device == device


@dataclass(frozen=True)
class OutagePair:
    """Per-slot outage probabilities of device 1 and device 2."""

    p1: float
    p2: float

    def astuple(self) -> tuple[float, float]:
        return (self.p1, self.p2)


@dataclass(frozen=True)
class SlotOutcome:
    """One realised slot: per-device decode success and harvested energy [J]."""

    success: tuple[bool, bool]
    harvested: tuple[float, float]


@dataclass(frozen=True)
class McOutage:
    """Empirical outage frequencies with binomial standard errors."""

    estimate: tuple[float, float]
    stderr: tuple[float, float]
    n_samples: int


def outage_oma(device: int, power: float, derived: DerivedParams) -> float:
    """Outage of device ``device`` transmitting alone at ``power`` watts."""
    if power <= 0.0:
        return 1.0
    lam = derived.params.lam[device - 1]
    return 1.0 - math.exp(-lam * derived.beta * derived.sigma2 / power)


def outage_wet_oma(device: int, power: float, derived: DerivedParams) -> float:
    """Outage of a solo transmission with concurrent charging of the other device.

    The access point decodes through its own energy signal, so the OMA
    exponential is scaled by the self-interference factor
    ``lambda0*P / (lambda0*P + lambda_n*beta*p_hap)``.
    """
    if derived.beta == 0.0:
        return 0.0
    if power <= 0.0:
        return 1.0
    p = derived.params
    lam = p.lam[device - 1]
    denom = p.lambda0 * power + lam * derived.beta * p.p_hap
    if denom <= 0.0 or p.lambda0 == 0.0:
        return 1.0
    factor = p.lambda0 * power / denom
    return 1.0 - factor * math.exp(-lam * derived.beta * derived.sigma2 / power)


def noma_decoding_order(p1: float, p2: float, derived: DerivedParams) -> tuple[int, int]:
    """Fixed decoding arrangement ranked by mean received power P_n/lambda_n.

    Returns (first, second) device numbers; ties go to device 1.
    """
    lam1, lam2 = derived.params.lam
    return (1, 2) if p1 / lam1 >= p2 / lam2 else (2, 1)


def outage_noma(p1: float, p2: float, derived: DerivedParams) -> OutagePair:
    """Per-device outage when both transmit simultaneously (SIC at the HAP).

    The first-decoded device sees the other as interference; the second is
    decoded only after successful removal of the first, so its probability is
    the joint one.  If either power is zero that device is in outage with
    certainty and the other falls back to the solo formula.
    """
    if p1 <= 0.0 and p2 <= 0.0:
        return OutagePair(1.0, 1.0)
    if p1 <= 0.0:
        return OutagePair(1.0, outage_oma(2, p2, derived))
    if p2 <= 0.0:
        return OutagePair(outage_oma(1, p1, derived), 1.0)

    first, second = noma_decoding_order(p1, p2, derived)
    lam = derived.params.lam
    powers = (p1, p2)
    la1, la2 = lam[first - 1], lam[second - 1]
    pa1, pa2 = powers[first - 1], powers[second - 1]
    beta, sigma2 = derived.beta, derived.sigma2

    factor = la2 * pa1 / (la2 * pa1 + la1 * pa2 * beta)
    out_first = 1.0 - factor * math.exp(-la1 * beta * sigma2 / pa1)
    out_second = 1.0 - factor * math.exp(
        -(la2 * pa1 + la1 * pa2 + la1 * pa2 * beta) * beta * sigma2 / (pa1 * pa2)
    )
    if first == 1:
        return OutagePair(out_first, out_second)
    return OutagePair(out_second, out_first)


def outage_pair(scheme: Scheme, powers: tuple[float, float], derived: DerivedParams) -> OutagePair:
    """Outage probabilities of both devices under any scheme."""
    if scheme.tag == WET:
        return OutagePair(1.0, 1.0)
    if scheme.tag == NOMA:
        return outage_noma(powers[0], powers[1], derived)
    d = scheme.device
    p = powers[d - 1]
    out = outage_oma(d, p, derived) if scheme.tag == OMA else outage_wet_oma(d, p, derived)
    return OutagePair(out, 1.0) if d == 1 else OutagePair(1.0, out)


def mean_harvest(device: int, derived: DerivedParams) -> float:
    """Expected energy [J] harvested by an idle device in a charged slot."""
    p = derived.params
    return p.eta * p.tau * p.p_hap / p.lam[device - 1]


def _draw_gains(rng, derived: DerivedParams, size=None):
    """Draw (omega1, omega2, omega0) channel power gains.

    Exactly three exponentials are consumed per sample regardless of scheme,
    so traces depend on the seed alone, not on the policy path.
    """
    p = derived.params
    w1 = rng.exponential(1.0 / p.lambda1, size)
    w2 = rng.exponential(1.0 / p.lambda2, size)
    scale0 = 1.0 / p.lambda0 if p.lambda0 > 0 else np.inf
    w0 = rng.exponential(scale0, size)
    return w1, w2, w0


def _noma_success(phi1, phi2, w0_interf, beta, sigma2, order_first):
    """Success flags of device 1 and 2 under sequential SIC.

    ``order_first`` is 1 or 2 (fixed order) or None for per-draw ordering by
    instantaneous received power.  The second-decoded device succeeds only if
    the first was decoded and removed.
    """
    if order_first is None:
        first_is_1 = phi1 >= phi2
    else:
        first_is_1 = np.broadcast_to(order_first == 1, np.shape(phi1))
    noise = w0_interf + sigma2
    # decode the first treating the second as interference, then the second clean
    s1_first = phi1 >= beta * (phi2 + noise)
    s2_after = s1_first & (phi2 >= beta * noise)
    s2_first = phi2 >= beta * (phi1 + noise)
    s1_after = s2_first & (phi1 >= beta * noise)
    succ1 = np.where(first_is_1, s1_first, s1_after)
    succ2 = np.where(first_is_1, s2_after, s2_first)
    return succ1, succ2


def mc_outage_estimate(
    scheme: Scheme,
    powers: tuple[float, float],
    derived: DerivedParams,
    n_samples: int,
    seed: int,
    order: str = "mean",
) -> McOutage:
    """Estimate per-device outage by direct fading simulation.

    ``order`` selects the NOMA decoding order: ``"mean"`` ranks by mean
    received power (matching the closed forms), ``"instantaneous"`` re-ranks
    per draw.  Fixed seed gives bit-identical results.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    if order not in ("mean", "instantaneous"):
        raise ValueError(f"unknown decoding order {order!r}")
    rng = np.random.default_rng(seed)
    w1, w2, w0 = _draw_gains(rng, derived, n_samples)
    p = derived.params
    beta, sigma2 = derived.beta, derived.sigma2

    if scheme.tag == WET:
        succ1 = np.zeros(n_samples, dtype=bool)
        succ2 = np.zeros(n_samples, dtype=bool)
    elif scheme.tag == NOMA:
        phi1 = powers[0] * w1
        phi2 = powers[1] * w2
        first = None if order == "instantaneous" else noma_decoding_order(powers[0], powers[1], derived)[0]
        succ1, succ2 = _noma_success(phi1, phi2, 0.0, beta, sigma2, first)
    else:
        d = scheme.device
        phi = powers[d - 1] * (w1 if d == 1 else w2)
        interf = p.p_hap * w0 if scheme.tag == WET_OMA else 0.0
        succ = phi >= beta * (interf + sigma2)
        other = np.zeros(n_samples, dtype=bool)
        succ1, succ2 = (succ, other) if d == 1 else (other, succ)

    est = (float(1.0 - succ1.mean()), float(1.0 - succ2.mean()))
    se = tuple(math.sqrt(e * (1.0 - e) / n_samples) for e in est)
    return McOutage(estimate=est, stderr=se, n_samples=n_samples)


def sample_slot_outcome(
    scheme: Scheme,
    powers: tuple[float, float],
    derived: DerivedParams,
    rng,
    harvest_mode: str = "deterministic",
    order: str = "instantaneous",
) -> SlotOutcome:
    """Realise one slot: decode successes plus harvested joules.

    ``harvest_mode="deterministic"`` credits the mean harvest; ``"sampled"``
    uses the drawn channel gain (reciprocal WET/WIT channels, so the same
    gain drives both directions).  Consumes exactly three exponential draws.
    """
    if harvest_mode not in ("deterministic", "sampled"):
        raise ValueError(f"unknown harvest_mode {harvest_mode!r}")
    w1, w2, w0 = _draw_gains(rng, derived)
    p = derived.params
    beta, sigma2 = derived.beta, derived.sigma2

    if scheme.tag == WET:
        succ = (False, False)
    elif scheme.tag == NOMA:
        first = None if order == "instantaneous" else noma_decoding_order(powers[0], powers[1], derived)[0]
        s1, s2 = _noma_success(powers[0] * w1, powers[1] * w2, 0.0, beta, sigma2, first)
        succ = (bool(s1), bool(s2))
    else:
        d = scheme.device
        phi = powers[d - 1] * (w1 if d == 1 else w2)
        interf = p.p_hap * w0 if scheme.tag == WET_OMA else 0.0
        ok = bool(phi >= beta * (interf + sigma2))
        succ = (ok, False) if d == 1 else (False, ok)

    gains = (w1, w2)
    harvested = [0.0, 0.0]
    if scheme.wet_active:
        for d in (1, 2):
            if scheme.transmitting(d):
                continue  # half duplex: a transmitting device cannot harvest
            if harvest_mode == "deterministic":
                harvested[d - 1] = mean_harvest(d, derived)
            else:
                harvested[d - 1] = p.eta * p.tau * p.p_hap * gains[d - 1]
    return SlotOutcome(success=succ, harvested=(harvested[0], harvested[1]))
