"""Scenario configuration: defaults, the `key = value` parser, validation."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, fields
from typing import Optional

from .mac import MacParams
from .propagation import MODELS, FadingSpec, Model, RadioParams
from .routing import PROTOCOLS, RoutingParams


class ConfigError(ValueError):
    """A configuration problem, located by line number and key when known."""

    def __init__(self, message, key=None, line=None):
        self.message = message
        self.key = key
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key {key!r}")
        prefix = ", ".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)


@dataclass(frozen=True)
class ScenarioConfig:
    # scenario
    nodes: int = 50
    width: float = 670.0
    height: float = 670.0
    sim_time: float = 200.0
    v_min: float = 0.5
    v_max: float = 5.0
    pause: float = 0.0
    protocol: str = "aodv"
    propagation: str = "tworay"
    connections: int = 10
    seed: int = 1
    rate_pps: float = 8.0
    payload_bytes: int = 512
    start_window: float = 10.0
    # propagation parameters; None means "model default" and is only
    # accepted for the model that uses it
    beta: Optional[float] = None
    sigma_db: Optional[float] = None
    d0: Optional[float] = None
    rice_k: Optional[float] = None
    nakagami_m: Optional[float] = None
    fading_mean: Optional[str] = None
    # PHY
    pt: float = 0.28183815
    gt: float = 1.0
    gr: float = 1.0
    system_loss: float = 1.0
    frequency_hz: float = 914e6
    ht: float = 1.5
    hr: float = 1.5
    rx_thresh: float = 3.652e-10
    cs_thresh: float = 1.559e-11
    # MAC
    link_rate: float = 2e6
    slot: float = 20e-6
    sifs: float = 10e-6
    difs: float = 50e-6
    cw_min: int = 32
    cw_max: int = 1024
    retry_limit: int = 7
    mac_header_bytes: int = 58
    ack_bytes: int = 14
    queue_capacity: int = 50
    capture_db: float = 10.0
    queue_policy: str = "auto"
    # energy
    initial_energy: float = 100.0
    tx_power: float = 0.660
    rx_power: float = 0.395
    charge_overheard: bool = True
    # routing
    hello_interval: float = 1.0
    allowed_hello_loss: int = 2
    active_route_timeout: float = 10.0
    rreq_retries: int = 3
    aodv_intermediate_reply: bool = True
    dsr_cache_size: int = 64
    send_buffer_size: int = 64
    send_buffer_timeout: float = 30.0
    dsr_reply_from_cache: bool = True
    dsr_gratuitous_reply: bool = False
    dump_interval: float = 15.0
    triggered_updates: bool = True
    broadcast_jitter: float = 0.01

    def __post_init__(self):
        validate(self)

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    # derived parameter objects --------------------------------------------

    def radio(self) -> RadioParams:
        return RadioParams.from_frequency(
            self.frequency_hz, pt=self.pt, gt=self.gt, gr=self.gr, loss=self.system_loss,
            ht=self.ht, hr=self.hr, rx_thresh=self.rx_thresh, cs_thresh=self.cs_thresh)

    def fading(self) -> FadingSpec:
        base = FadingSpec()
        return FadingSpec(
            kind=Model(self.propagation),
            beta=_or(self.beta, base.beta),
            sigma_db=_or(self.sigma_db, base.sigma_db),
            d0=_or(self.d0, base.d0),
            k=_or(self.rice_k, base.k),
            m=_or(self.nakagami_m, base.m),
            mean_model=Model(_or(self.fading_mean, base.mean_model.value)),
        )

    def mac(self) -> MacParams:
        if self.queue_policy == "auto":
            priority = PROTOCOLS[self.protocol].control_first
        else:
            priority = self.queue_policy == "priority"
        return MacParams(
            link_rate=self.link_rate, slot=self.slot, sifs=self.sifs, difs=self.difs,
            cw_min=self.cw_min, cw_max=self.cw_max, retry_limit=self.retry_limit,
            header_bytes=self.mac_header_bytes, ack_bytes=self.ack_bytes,
            queue_capacity=self.queue_capacity, capture_db=self.capture_db,
            priority_queue=priority)

    def routing(self) -> RoutingParams:
        return RoutingParams(
            hello_interval=self.hello_interval, allowed_hello_loss=self.allowed_hello_loss,
            active_route_timeout=self.active_route_timeout, rreq_retries=self.rreq_retries,
            aodv_intermediate_reply=self.aodv_intermediate_reply,
            dsr_cache_size=self.dsr_cache_size, send_buffer_size=self.send_buffer_size,
            send_buffer_timeout=self.send_buffer_timeout,
            dsr_reply_from_cache=self.dsr_reply_from_cache,
            dsr_gratuitous_reply=self.dsr_gratuitous_reply,
            dump_interval=self.dump_interval, triggered_updates=self.triggered_updates,
            broadcast_jitter=self.broadcast_jitter)


def _or(value, default):
    return default if value is None else value


FIELD_TYPES = {f.name: f.type for f in fields(ScenarioConfig)}

# Model-specific keys and the models that accept them.
MODEL_KEYS = {
    "beta": ("shadowing",),
    "sigma_db": ("shadowing",),
    "d0": ("shadowing",),
    "rice_k": ("rice",),
    "nakagami_m": ("nakagami",),
    "fading_mean": ("rayleigh", "rice", "nakagami"),
}

POSITIVE = ("width", "height", "sim_time", "rate_pps", "pt", "gt", "gr", "frequency_hz",
            "ht", "hr", "rx_thresh", "cs_thresh", "link_rate", "slot", "initial_energy",
            "hello_interval", "active_route_timeout", "send_buffer_timeout", "dump_interval")
NON_NEGATIVE = ("v_min", "v_max", "pause", "start_window", "sifs", "difs", "retry_limit",
                "mac_header_bytes", "ack_bytes", "capture_db", "tx_power", "rx_power",
                "rreq_retries", "broadcast_jitter", "seed")


def validate(cfg: ScenarioConfig) -> None:
    def fail(key, msg):
        raise ConfigError(msg, key=key)

    for key in POSITIVE:
        if not getattr(cfg, key) > 0:
            fail(key, "must be positive")
    for key in NON_NEGATIVE:
        if getattr(cfg, key) < 0:
            fail(key, "must be non-negative")
    if cfg.nodes < 2:
        fail("nodes", "need at least 2 nodes")
    if cfg.protocol not in PROTOCOLS:
        fail("protocol", f"expected one of {sorted(PROTOCOLS)}")
    if cfg.propagation not in MODELS:
        fail("propagation", f"expected one of {list(MODELS)}")
    if cfg.connections < 0:
        fail("connections", "must be non-negative")
    if cfg.connections > cfg.nodes * (cfg.nodes - 1):
        fail("connections", f"more connections than ordered pairs of {cfg.nodes} nodes")
    if cfg.payload_bytes < 1:
        fail("payload_bytes", "must be at least 1")
    if cfg.v_max > 0 and cfg.v_min > cfg.v_max:
        fail("v_min", "exceeds v_max")
    if cfg.start_window >= cfg.sim_time:
        fail("start_window", "connections must start before sim_time")
    if cfg.cs_thresh > cfg.rx_thresh:
        fail("cs_thresh", "must not exceed rx_thresh")
    if cfg.system_loss < 1:
        fail("system_loss", "must be >= 1")
    if not 1 <= cfg.cw_min <= cfg.cw_max:
        fail("cw_min", "need 1 <= cw_min <= cw_max")
    if cfg.queue_capacity < 1:
        fail("queue_capacity", "must be at least 1")
    if cfg.queue_policy not in ("auto", "priority", "fifo"):
        fail("queue_policy", "expected auto, priority or fifo")
    for key, models in MODEL_KEYS.items():
        if getattr(cfg, key) is not None and cfg.propagation not in models:
            fail(key, f"only valid with propagation {' or '.join(models)}, "
                      f"not {cfg.propagation}")
    if cfg.beta is not None and cfg.beta <= 0:
        fail("beta", "must be positive")
    if cfg.sigma_db is not None and cfg.sigma_db < 0:
        fail("sigma_db", "must be non-negative")
    if cfg.d0 is not None and cfg.d0 <= 0:
        fail("d0", "must be positive")
    if cfg.rice_k is not None and cfg.rice_k < 0:
        fail("rice_k", "must be non-negative")
    if cfg.nakagami_m is not None and cfg.nakagami_m < 0.5:
        fail("nakagami_m", "must be >= 0.5")
    if cfg.fading_mean is not None and cfg.fading_mean not in ("freespace", "tworay"):
        fail("fading_mean", "expected freespace or tworay")
    for key in ("allowed_hello_loss", "dsr_cache_size", "send_buffer_size"):
        if getattr(cfg, key) < 1:
            fail(key, "must be at least 1")


_TRUE = {"true", "yes", "on", "1"}
_FALSE = {"false", "no", "off", "0"}


def convert(key: str, raw: str):
    """Turn the text of one value into the field's type."""
    kind = FIELD_TYPES[key].replace("Optional[", "").rstrip("]")
    raw = raw.strip()
    try:
        if kind == "bool":
            low = raw.lower()
            if low in _TRUE:
                return True
            if low in _FALSE:
                return False
            raise ValueError(raw)
        if kind == "int":
            return int(raw, 0)
        if kind == "float":
            return float(raw)
    except ValueError:
        raise ConfigError(f"malformed {kind} value {raw!r}", key=key) from None
    return raw.lower()


def _parse_area(raw: str):
    parts = raw.lower().replace("×", "x").split("x")
    if len(parts) != 2:
        raise ValueError(raw)
    return float(parts[0]), float(parts[1])


def parse_assignments(text: str) -> dict:
    """Parse `key = value` lines into {key: (value, line)}."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError("expected 'key = value'", line=lineno)
        key, raw = (s.strip() for s in body.split("=", 1))
        if not raw:
            raise ConfigError("missing value", key=key, line=lineno)
        if key == "area":
            try:
                w, h = _parse_area(raw)
            except ValueError:
                raise ConfigError(f"malformed area {raw!r}, expected WxH", key=key,
                                  line=lineno) from None
            out["width"] = (w, lineno)
            out["height"] = (h, lineno)
            continue
        if key not in FIELD_TYPES:
            raise ConfigError("unknown key", key=key, line=lineno)
        try:
            out[key] = (convert(key, raw), lineno)
        except ConfigError as err:
            raise ConfigError(err.message, key=key, line=lineno) from None
    return out


def build_config(values: dict, base: ScenarioConfig | None = None) -> ScenarioConfig:
    """Apply {key: (value, line)} on top of ``base``, locating any error."""
    base = base or ScenarioConfig()
    plain = {k: v for k, (v, _) in values.items()}
    try:
        return dataclasses.replace(base, **plain)
    except ConfigError as err:
        line = values[err.key][1] if err.key in values else None
        raise ConfigError(err.message, key=err.key, line=line) from None


def parse_scenario(text: str, base: ScenarioConfig | None = None) -> ScenarioConfig:
    return build_config(parse_assignments(text), base)


def load_scenario(path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read())
