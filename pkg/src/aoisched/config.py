"""Scenario constants and derived quantities.

All physical and algorithmic parameters of the two-device wireless-powered
link live in :class:`SystemParams`; everything the model equations need that
can be computed from them (SNR threshold, noise power, power/battery
quantisation steps, per-slot battery level deltas) lives in
:class:`DerivedParams`.  Devices are numbered 1 and 2 throughout the public
API; tuples indexed 0/1 hold their per-device values in that order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

__all__ = [
    "ConfigError",
    "SystemParams",
    "DerivedParams",
    "DEFAULTS",
    "CONFIG_KEYS",
    "load_config",
    "read_config",
    "derive",
]


class ConfigError(ValueError):
    """Raised for malformed config documents or violated parameter invariants."""


# Baseline scenario: 10 W access point, 10 mW devices, 10 power levels,
# 0.02 J / 20-level batteries, rate target 2 bit/s/Hz, AoI truncated at 30.
# snr_db = 50 is the low-noise operating point used for the policy grids.
DEFAULTS = {
    "p_hap_watts": 10.0,
    "p_s_max_watts": 0.01,
    "power_levels": 10,
    "battery_levels": 20,
    "e_max_joules": 0.02,
    "r_bar": 2.0,
    "tau_s": 1.0,
    "eta": 0.5,
    "lambda0": 1e8,
    "lambda1": 250.0,
    "lambda2": 500.0,
    "w1": 0.5,
    "w2": 0.5,
    "delta_max": 30,
    "snr_db": 50.0,
    "gamma": 0.8,
    "eps_star": 1e-4,
}

CONFIG_KEYS = tuple(DEFAULTS)

_INT_KEYS = ("power_levels", "battery_levels", "delta_max")


@dataclass(frozen=True)
class SystemParams:
    """Validated scenario constants (see :data:`DEFAULTS` for the baseline)."""

    p_hap: float          # HAP transmit power [W]
    p_s_max: float        # device max transmit power [W]
    power_levels: int     # number of device power levels L
    battery_levels: int   # number of battery levels M (levels run 0..M)
    e_max: float          # battery capacity [J]
    r_bar: float          # target rate [bit/s/Hz]
    tau: float            # slot duration [s]
    eta: float            # energy conversion efficiency, (0, 1]
    lambda0: float        # self-interference fading parameter
    lambda1: float        # device-1 fading parameter
    lambda2: float        # device-2 fading parameter
    w1: float             # device-1 AoI weight
    w2: float             # device-2 AoI weight
    delta_max: int        # AoI truncation
    snr_db: float         # transmit SNR rho [dB]
    gamma: float          # discount factor, strictly inside (0, 1)
    eps_star: float       # policy-evaluation accuracy

    @property
    def lam(self) -> tuple[float, float]:
        """Per-device fading parameters, device 1 first."""
        return (self.lambda1, self.lambda2)

    @property
    def w(self) -> tuple[float, float]:
        return (self.w1, self.w2)

    def with_snr(self, snr_db: float) -> "SystemParams":
        return replace(self, snr_db=float(snr_db))

    def __post_init__(self):
        _validate(self)

    def as_config_dict(self) -> dict:
        """Round-trip back to config-file keys (for output metadata)."""
        return {
            "p_hap_watts": self.p_hap,
            "p_s_max_watts": self.p_s_max,
            "power_levels": self.power_levels,
            "battery_levels": self.battery_levels,
            "e_max_joules": self.e_max,
            "r_bar": self.r_bar,
            "tau_s": self.tau,
            "eta": self.eta,
            "lambda0": self.lambda0,
            "lambda1": self.lambda1,
            "lambda2": self.lambda2,
            "w1": self.w1,
            "w2": self.w2,
            "delta_max": self.delta_max,
            "snr_db": self.snr_db,
            "gamma": self.gamma,
            "eps_star": self.eps_star,
        }


def _validate(p: SystemParams) -> None:
    def positive(name, value):
        if not value > 0:
            raise ConfigError(f"{name} must be > 0, got {value}")

    for name in ("p_hap", "p_s_max", "e_max", "tau"):
        positive(name, getattr(p, name))
    for name in ("power_levels", "battery_levels", "delta_max"):
        if getattr(p, name) < 1:
            raise ConfigError(f"{name} must be >= 1, got {getattr(p, name)}")
    if not 0 < p.eta <= 1:
        raise ConfigError(f"eta must lie in (0, 1], got {p.eta}")
    if p.lambda0 < 0:
        raise ConfigError(f"lambda0 must be >= 0, got {p.lambda0}")
    positive("lambda1", p.lambda1)
    positive("lambda2", p.lambda2)
    if p.r_bar < 0:
        raise ConfigError(f"r_bar must be >= 0, got {p.r_bar}")
    for name in ("w1", "w2"):
        if not 0 <= getattr(p, name) <= 1:
            raise ConfigError(f"{name} must lie in [0, 1], got {getattr(p, name)}")
    if abs(p.w1 + p.w2 - 1.0) > 1e-9:
        raise ConfigError(f"w1 + w2 must equal 1, got {p.w1} + {p.w2} = {p.w1 + p.w2}")
    if not 0 < p.gamma < 1:
        raise ConfigError(f"gamma must lie strictly inside (0, 1), got {p.gamma}")
    positive("eps_star", p.eps_star)
    # policy files store one action code per byte
    if p.power_levels + 4 > 255:
        raise ConfigError(f"power_levels={p.power_levels} exceeds the action-code byte range")


@dataclass(frozen=True)
class DerivedParams:
    """Quantities computed once from :class:`SystemParams`.

    ``cost_levels[l]`` is the number of battery levels one slot of
    transmission at power level ``l`` consumes (ceiling, so a device can never
    spend energy the quantised battery does not hold); ``harvest_levels[n-1]``
    is the deterministic number of levels device ``n`` gains in a charged
    slot, from the mean channel gain ``1/lambda_n`` quantised by floor.
    """

    params: SystemParams
    beta: float                      # SNR threshold 2**r_bar - 1
    sigma2: float                    # noise power [W]
    p_step: float                    # device power quantum [W]
    e_step: float                    # battery level quantum [J]
    cost_levels: tuple[int, ...]     # indexed by power level 0..L
    harvest_levels: tuple[int, int]  # per device


def _ceil_levels(x: float) -> int:
    # tolerant ceiling: absorbs float noise of order 1e-9 relative
    return math.ceil(x - 1e-9 * max(1.0, abs(x)))


def _floor_levels(x: float) -> int:
    return math.floor(x + 1e-9 * max(1.0, abs(x)))


def derive(params: SystemParams) -> DerivedParams:
    """Compute all derived quantities. Pure: equal inputs give equal outputs."""
    beta = 2.0 ** params.r_bar - 1.0
    sigma2 = params.p_s_max / 10.0 ** (params.snr_db / 10.0)
    p_step = params.p_s_max / params.power_levels
    e_step = params.e_max / params.battery_levels
    cost_levels = tuple(
        _ceil_levels(l * p_step * params.tau / e_step)
        for l in range(params.power_levels + 1)
    )
    harvest_levels = tuple(
        _floor_levels(params.eta * params.tau * params.p_hap / lam / e_step)
        for lam in params.lam
    )
    return DerivedParams(
        params=params,
        beta=beta,
        sigma2=sigma2,
        p_step=p_step,
        e_step=e_step,
        cost_levels=cost_levels,
        harvest_levels=harvest_levels,
    )


def load_config(text: str, use_defaults: bool = True) -> SystemParams:
    """Parse a flat ``key = value`` document into validated SystemParams.

    Lines starting with ``#`` (or inline ``#`` suffixes) are comments.
    Unknown and duplicate keys are rejected.  Missing keys fall back to
    :data:`DEFAULTS` unless ``use_defaults`` is False.
    """
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in DEFAULTS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        values[key] = _parse_number(key, value, integer=key in _INT_KEYS)

    if use_defaults:
        merged = {**DEFAULTS, **values}
    else:
        missing = [k for k in DEFAULTS if k not in values]
        if missing:
            raise ConfigError(f"missing keys with defaults disabled: {', '.join(missing)}")
        merged = values

    return SystemParams(
        p_hap=merged["p_hap_watts"],
        p_s_max=merged["p_s_max_watts"],
        power_levels=merged["power_levels"],
        battery_levels=merged["battery_levels"],
        e_max=merged["e_max_joules"],
        r_bar=merged["r_bar"],
        tau=merged["tau_s"],
        eta=merged["eta"],
        lambda0=merged["lambda0"],
        lambda1=merged["lambda1"],
        lambda2=merged["lambda2"],
        w1=merged["w1"],
        w2=merged["w2"],
        delta_max=merged["delta_max"],
        snr_db=merged["snr_db"],
        gamma=merged["gamma"],
        eps_star=merged["eps_star"],
    )


def read_config(path) -> SystemParams:
    with open(path, "r", encoding="utf-8") as fh:
        return load_config(fh.read())


def _parse_number(key: str, value: str, integer: bool):
    try:
        x = float(value)
    except ValueError:
        raise ConfigError(f"key {key!r}: non-numeric value {value!r}") from None
    if integer:
        if not x.is_integer():
            raise ConfigError(f"key {key!r}: expected an integer, got {value!r}")
        return int(x)
    return x
