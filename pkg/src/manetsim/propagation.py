"""Radio propagation: deterministic path loss and stochastic fading.

Deterministic models give the mean received power at a distance; the
fading models multiply that mean by a unit-mean random power gain drawn
fresh for every (frame, receiver) pair.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .special import bessel_i0e, lgamma

# Rounded value used by the legacy simulator defaults (gives lambda = 0.32823 m at 914 MHz).
SPEED_OF_LIGHT = 3.0e8


class Model(str, enum.Enum):
    FREESPACE = "freespace"
    TWORAY = "tworay"
    SHADOWING = "shadowing"
    RAYLEIGH = "rayleigh"
    RICE = "rice"
    NAKAGAMI = "nakagami"

    @property
    def is_fading(self) -> bool:
        return self in (Model.RAYLEIGH, Model.RICE, Model.NAKAGAMI)

    @property
    def is_deterministic(self) -> bool:
        return self in (Model.FREESPACE, Model.TWORAY)


MODELS = tuple(m.value for m in Model)


class PropagationError(ValueError):
    pass


# Path-loss exponent ranges by environment.
PATH_LOSS_EXPONENTS = {
    "free_space": (2.0, 2.0),
    "shadowed_urban": (2.7, 5.0),
    "inbuilding_los": (1.6, 1.8),
    "obstructed": (4.0, 6.0),
}

# Shadowing deviation ranges (dB) by environment.
SHADOWING_DEVIATIONS = {
    "outdoor": (4.0, 12.0),
    "office_hard": (7.0, 7.0),
    "office_soft": (9.6, 9.6),
    "factory_los": (3.0, 6.0),
    "factory_obstructed": (6.8, 6.8),
}


@dataclass(frozen=True)
class RadioParams:
    """PHY constants shared by transmitter and receiver.

    Defaults reproduce the classic 914 MHz WaveLAN setup whose nominal
    two-ray range is 250 m.
    """

    pt: float = 0.28183815
    gt: float = 1.0
    gr: float = 1.0
    loss: float = 1.0
    wavelength: float = SPEED_OF_LIGHT / 914e6
    ht: float = 1.5
    hr: float = 1.5
    rx_thresh: float = 3.652e-10
    cs_thresh: float = 1.559e-11

    def __post_init__(self):
        for name in ("pt", "gt", "gr", "loss", "wavelength", "ht", "hr",
                     "rx_thresh", "cs_thresh"):
            if not getattr(self, name) > 0:
                raise PropagationError(f"{name} must be strictly positive")
        if self.loss < 1:
            raise PropagationError("system loss must be >= 1")
        if self.cs_thresh > self.rx_thresh:
            raise PropagationError("cs_thresh must not exceed rx_thresh")

    @classmethod
    def from_frequency(cls, hz: float, **kw) -> "RadioParams":
        return cls(wavelength=SPEED_OF_LIGHT / hz, **kw)


@dataclass(frozen=True)
class FadingSpec:
    """Which propagation model applies, with its parameters.

    ``power`` is the mean received power used by the envelope densities
    (P for Rayleigh/Rice, Omega for Nakagami). ``mean_model`` picks the
    deterministic model the fading gain multiplies.
    """

    kind: Model = Model.TWORAY
    beta: float = 2.7
    sigma_db: float = 4.0
    d0: float = 1.0
    k: float = 5.0
    m: float = 0.75
    power: float = 1.0
    mean_model: Model = field(default=Model.TWORAY)

    def __post_init__(self):
        object.__setattr__(self, "kind", Model(self.kind))
        object.__setattr__(self, "mean_model", Model(self.mean_model))
        if self.mean_model not in (Model.FREESPACE, Model.TWORAY):
            raise PropagationError("fading mean must be freespace or tworay")
        if self.beta <= 0 or self.d0 <= 0 or self.power <= 0:
            raise PropagationError("beta, d0 and power must be positive")
        if self.sigma_db < 0:
            raise PropagationError("sigma_db must be non-negative")
        if self.k < 0:
            raise PropagationError("Rice K must be >= 0")
        if self.m < 0.5:
            raise PropagationError("Nakagami m must be >= 1/2")


@dataclass(frozen=True)
class PowerSample:
    deterministic_w: float
    gain: float
    received_w: float

    def receivable(self, rx_thresh: float) -> bool:
        return self.received_w >= rx_thresh


def _check_distance(d):
    if np.any(np.asarray(d) <= 0):
        raise PropagationError("distance must be positive")


def friis_power(rp: RadioParams, d):
    """Free-space received power in watts."""
    _check_distance(d)
    return rp.pt * rp.gt * rp.gr * rp.wavelength ** 2 / ((4 * math.pi) ** 2 * d * d * rp.loss)


def crossover_distance(rp: RadioParams) -> float:
    return 4 * math.pi * rp.ht * rp.hr / rp.wavelength


def two_ray_power(rp: RadioParams, d):
    """Two-ray ground power; free space below the crossover distance."""
    _check_distance(d)
    dc = crossover_distance(rp)
    ground = rp.pt * rp.gt * rp.gr * rp.ht ** 2 * rp.hr ** 2 / (np.power(d, 4) * rp.loss)
    if np.ndim(d) == 0:
        return friis_power(rp, d) if d < dc else float(ground)
    return np.where(np.asarray(d) < dc, friis_power(rp, d), ground)


def shadowing_mean_db(beta: float, d, d0: float):
    """Mean of 10*log10(Pr(d)/Pr(d0))."""
    _check_distance(d)
    if d0 <= 0:
        raise PropagationError("reference distance must be positive")
    out = -10.0 * beta * np.log10(np.asarray(d, dtype=float) / d0)
    return float(out) if np.ndim(d) == 0 else out


def shadowing_mean_power(spec: FadingSpec, rp: RadioParams, d):
    out = friis_power(rp, spec.d0) * np.power(np.asarray(d, dtype=float) / spec.d0, -spec.beta)
    return float(out) if np.ndim(d) == 0 else out


def shadowing_sample(spec: FadingSpec, rp: RadioParams, d: float, rng) -> PowerSample:
    """Log-normal shadowing: path-loss mean times a fresh 10**(X/10) factor."""
    if spec.kind is not Model.SHADOWING:
        raise PropagationError("shadowing_sample needs a shadowing spec")
    mean_w = shadowing_mean_power(spec, rp, d)
    x_db = spec.sigma_db * rng.normal() if spec.sigma_db > 0 else 0.0
    gain = 10.0 ** (x_db / 10.0)
    return PowerSample(mean_w, gain, mean_w * gain)


def envelope_pdf(spec: FadingSpec, x):
    """Density of the received envelope ``x`` under the fading model.

    The Rice density is evaluated with the exponentially scaled Bessel
    function so large arguments do not overflow.
    """
    xs = np.asarray(x, dtype=float)
    p = spec.power
    pos = np.maximum(xs, 0.0)
    if spec.kind is Model.RAYLEIGH:
        out = 2 * pos / p * np.exp(-pos * pos / p)
    elif spec.kind is Model.RICE:
        k = spec.k
        z = 2 * pos * math.sqrt(k * (k + 1) / p)
        out = (2 * pos * (k + 1) / p) * np.exp(-k - (k + 1) * pos * pos / p + z) * bessel_i0e(z)
    elif spec.kind is Model.NAKAGAMI:
        m = spec.m
        with np.errstate(divide="ignore", invalid="ignore"):
            logf = (math.log(2.0) + m * math.log(m) + (2 * m - 1) * np.log(pos)
                    - lgamma(m) - m * math.log(p) - m * pos * pos / p)
        out = np.exp(logf)
        if m == 0.5:
            out = np.where(pos == 0, math.sqrt(2.0 / (math.pi * p)), out)
    else:
        raise PropagationError(f"no envelope density for {spec.kind.value}")
    out = np.where(xs < 0, 0.0, out)
    return float(out) if np.ndim(x) == 0 else out


def fading_gain(spec: FadingSpec, rng, n: int | None = None):
    """Unit-mean power gain g = x**2 / E[x**2]; ``n`` draws a vector."""
    if spec.kind is Model.RAYLEIGH:
        return rng.exponential(n)
    if spec.kind is Model.RICE:
        k = spec.k
        nu = math.sqrt(k / (k + 1))
        s = math.sqrt(0.5 / (k + 1))
        a = rng.normal(n)
        b = rng.normal(n)
        return (nu + s * a) ** 2 + (s * b) ** 2
    if spec.kind is Model.NAKAGAMI:
        return rng.gamma(spec.m, n) / spec.m
    raise PropagationError(f"{spec.kind.value} has no fading gain")


def sample_envelope(spec: FadingSpec, rng, n: int):
    """Envelope amplitudes implied by ``fading_gain`` at mean power ``spec.power``."""
    return np.sqrt(fading_gain(spec, rng, n) * spec.power)


def mean_power(spec: FadingSpec, rp: RadioParams, d):
    """Deterministic part of the received power for any model."""
    kind = spec.kind
    if kind is Model.FREESPACE:
        return friis_power(rp, d)
    if kind is Model.TWORAY:
        return two_ray_power(rp, d)
    if kind is Model.SHADOWING:
        return shadowing_mean_power(spec, rp, d)
    if spec.mean_model is Model.FREESPACE:
        return friis_power(rp, d)
    return two_ray_power(rp, d)


def mean_power_sq(spec: FadingSpec, rp: RadioParams):
    """Deterministic mean power as a function of squared distance.

    Same values as ``mean_power`` with the constants folded in ahead of
    time; the simulator calls it once per frame, so it skips validation.
    """
    kind = spec.kind
    if kind.is_fading:
        kind = spec.mean_model
    near = rp.pt * rp.gt * rp.gr * rp.wavelength ** 2 / ((4 * math.pi) ** 2 * rp.loss)
    if kind is Model.FREESPACE:
        return lambda d2: near / d2
    if kind is Model.TWORAY:
        far = rp.pt * rp.gt * rp.gr * rp.ht ** 2 * rp.hr ** 2 / rp.loss
        dc2 = crossover_distance(rp) ** 2
        return lambda d2: np.where(d2 < dc2, near / d2, far / (d2 * d2))
    ref = friis_power(rp, spec.d0)
    half_beta = -0.5 * spec.beta
    d02 = spec.d0 ** 2
    return lambda d2: ref * np.power(d2 / d02, half_beta)


def channel_gain(spec: FadingSpec, rng, n: int):
    """Random power factors for ``n`` receivers, or None for deterministic models."""
    if spec.kind is Model.SHADOWING:
        if spec.sigma_db > 0:
            return np.power(10.0, spec.sigma_db * rng.normal(n) / 10.0)
        return None
    if spec.kind.is_fading:
        return fading_gain(spec, rng, n)
    return None


def received_power(spec: FadingSpec, rp: RadioParams, d: float, rng) -> PowerSample:
    if spec.kind is Model.SHADOWING:
        return shadowing_sample(spec, rp, d, rng)
    det = float(mean_power(spec, rp, d))
    gain = float(fading_gain(spec, rng)) if spec.kind.is_fading else 1.0
    return PowerSample(det, gain, det * gain)


def received_power_vec(spec: FadingSpec, rp: RadioParams, d: np.ndarray, rng) -> np.ndarray:
    """Received power at many distances with one independent draw each."""
    det = mean_power(spec, rp, d)
    n = d.size
    if spec.kind is Model.SHADOWING:
        if spec.sigma_db > 0:
            det = det * np.power(10.0, spec.sigma_db * rng.normal(n) / 10.0)
        return det
    if spec.kind.is_fading:
        return det * fading_gain(spec, rng, n)
    return det
