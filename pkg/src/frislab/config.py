"""Flat key-value configuration shared by the CLI, harness, and estimator.

Defaults reproduce the standard operating point: a 6x6 port grid with 9
active ports, 16 transmit antennas, 36 vapor cells, 7 dB received SNR,
10 dB reference-to-signal ratio, Rician factor 2, and 4-QAM.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass

from .channel import AtomicPathParams, Geometry
from .modulation import SymbolModel, make_constellation
from .optimizer import AOConfig

WORKERS_ENV_VAR = "FRIS_LAB_WORKERS"


class ConfigError(ValueError):
    """A configuration key is unknown or its value failed to parse."""


@dataclass(frozen=True)
class SystemConfig:
    # surface and channel
    n_x: int = 6
    w_x: float = 2.0
    n_t: int = 16
    n_r: int = 36
    m_o: int = 9
    m_p: int = 8
    f_carrier_hz: float = 5e9
    d_ur_m: float = 16.0
    d_rv_m: float = 12.0
    d_uv_m: float = 20.0
    rician_k: float = 2.0
    paths_per_link: int = 2
    scatter_gain_db: float = -10.0
    shape_rv: bool = True
    # front end
    snr_db: float = 7.0
    rsr_db: float = 10.0
    lambda_c_m: float = 480e-9
    lambda_p_m: float = 780e-9
    # symbols and objective
    modulation: str = "qam4"
    kappa_override: complex | None = None
    # optimizer
    power_p: float = 1.0
    cem_k: int = 200
    cem_iters: int = 20
    cem_rho: float = 0.1
    cem_alpha: float = 0.7
    t_theta: int = 3
    ao_eps: float = 1e-8
    ao_max_iters: int = 50
    ao_stop_rule: str = "abs"
    mode: str = "fris"
    detector: str = "scalar_ls"
    init_seed: int = 0
    # experiments
    trials: int = 1000
    symbols_per_trial: int = 1000
    workers: int = 0

    def geometry(self) -> Geometry:
        return Geometry(
            d_ur_m=self.d_ur_m,
            d_rv_m=self.d_rv_m,
            d_uv_m=self.d_uv_m,
            carrier_frequency_hz=self.f_carrier_hz,
            n_x=self.n_x,
            w_x=self.w_x,
        )

    def atomic_params(self) -> AtomicPathParams:
        return AtomicPathParams(
            paths_per_link=self.paths_per_link,
            scatter_gain_db=self.scatter_gain_db,
        )

    def constellation(self) -> SymbolModel:
        return make_constellation(self.modulation)

    def effective_kappa(self) -> complex:
        if self.kappa_override is not None:
            return complex(self.kappa_override)
        return self.constellation().kappa

    def ao_config(self) -> AOConfig:
        return AOConfig(
            power=self.power_p,
            m_o=self.m_o,
            m_p=self.m_p,
            kappa=self.effective_kappa(),
            cem_k=self.cem_k,
            cem_iters=self.cem_iters,
            cem_rho=self.cem_rho,
            cem_alpha=self.cem_alpha,
            t_theta=self.t_theta,
            ao_eps=self.ao_eps,
            ao_max_iters=self.ao_max_iters,
            stop_rule=self.ao_stop_rule,
        )

    def resolved_workers(self) -> int:
        if self.workers > 0:
            return self.workers
        env = os.environ.get(WORKERS_ENV_VAR, "").strip()
        if env:
            try:
                value = int(env)
            except ValueError as exc:
                raise ConfigError(f"{WORKERS_ENV_VAR} must be an integer, got {env!r}") from exc
            if value > 0:
                return value
        return 1

    def as_dict(self) -> dict:
        out = dataclasses.asdict(self)
        if out["kappa_override"] is not None:
            out["kappa_override"] = str(out["kappa_override"])
        return out


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(SystemConfig)}


def _parse_value(key: str, raw: str):
    if key not in _FIELD_TYPES:
        raise ConfigError(f"unknown configuration key {key!r}")
    raw = raw.strip()
    kind = _FIELD_TYPES[key]
    try:
        if key == "kappa_override":
            return None if raw.lower() in ("", "none", "null") else complex(raw)
        if kind == "int":
            return int(raw)
        if kind == "float":
            return float(raw)
        if kind == "bool":
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        return raw
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {exc}") from exc


def load_config(
    path: str | None = None, overrides: tuple[str, ...] = ()
) -> SystemConfig:
    """Build a config from an optional ``key = value`` file plus overrides.

    Override strings have the form ``key=value`` and are applied after the
    file, last one wins.  Lines starting with ``#`` are comments.
    """
    values: dict = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                for lineno, line in enumerate(fh, start=1):
                    stripped = line.strip()
                    if not stripped or stripped.startswith("#"):
                        continue
                    if "=" not in stripped:
                        raise ConfigError(
                            f"{path}:{lineno}: expected 'key = value', got {stripped!r}"
                        )
                    key, raw = stripped.split("=", 1)
                    key = key.strip()
                    values[key] = _parse_value(key, raw)
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path!r}: {exc}") from exc
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override must look like key=value, got {item!r}")
        key, raw = item.split("=", 1)
        key = key.strip()
        values[key] = _parse_value(key, raw)
    return SystemConfig(**values)
