"""Plain-text key = value configuration files.

Recognized keys: omega0_rad_s, g_rad_s, temperature_K, nbar, geometry_ratio
(or w_m and d_m), gamma1 ... gamma8, renormalize_thermal, and optional
explicit thermal rates gamma_a ... gamma_e overriding detailed balance.
Unknown keys are errors. Blank lines and '#' comments are ignored.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .experiment import DEFAULT_GAMMA_CAVITY
from .model import DEFAULT_NBAR, PhysicalParams, RateTable, detailed_balance_rates

FLOAT_KEYS = {
    "omega0_rad_s", "g_rad_s", "temperature_K", "nbar", "geometry_ratio",
    "w_m", "d_m",
    "gamma1", "gamma2", "gamma3", "gamma4", "gamma5", "gamma6", "gamma7", "gamma8",
    "gamma_a", "gamma_b", "gamma_c", "gamma_e",
}
BOOL_KEYS = {"renormalize_thermal"}


@dataclass(frozen=True)
class SimulationConfig:
    """Parsed parameter bundle: physics constants plus the rate table."""

    params: PhysicalParams
    rates: RateTable
    nbar: float
    renormalize_thermal: bool


def default_config() -> SimulationConfig:
    """Built-in defaults: the tied reference rate set at 0.8 K."""
    from .experiment import tied_rate_table

    params = PhysicalParams()
    return SimulationConfig(params, tied_rate_table(params), DEFAULT_NBAR, False)


def parse_config_text(text: str, source: str = "<config>") -> SimulationConfig:
    raw: dict[str, object] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ValueError(f"{source}:{lineno}: expected 'key = value', got {line.strip()!r}")
        key, value = (part.strip() for part in stripped.split("=", 1))
        if key in raw:
            raise ValueError(f"{source}:{lineno}: duplicate key {key!r}")
        if key in FLOAT_KEYS:
            try:
                raw[key] = float(value)
            except ValueError:
                raise ValueError(f"{source}:{lineno}: {key} needs a number, got {value!r}") from None
        elif key in BOOL_KEYS:
            lowered = value.lower()
            if lowered not in ("true", "false"):
                raise ValueError(f"{source}:{lineno}: {key} must be true or false")
            raw[key] = lowered == "true"
        else:
            raise ValueError(f"{source}:{lineno}: unknown key {key!r}")

    if "geometry_ratio" in raw and ("w_m" in raw or "d_m" in raw):
        raise ValueError(f"{source}: give geometry_ratio or w_m/d_m, not both")
    if ("w_m" in raw) != ("d_m" in raw):
        raise ValueError(f"{source}: w_m and d_m must be given together")

    defaults = PhysicalParams()
    base = dict(
        omega0=raw.get("omega0_rad_s", defaults.omega0),
        g=raw.get("g_rad_s", defaults.g),
        temperature=raw.get("temperature_K", defaults.temperature),
    )
    if "w_m" in raw:
        params = PhysicalParams.from_mode_geometry(raw["w_m"], raw["d_m"], **base)
    else:
        params = PhysicalParams(geometry_ratio=raw.get("geometry_ratio", 1.0), **base)

    gamma_defaults = _default_gammas(params)
    gammas = {name: raw.get(name, gamma_defaults[name])
              for name in ("gamma1", "gamma2", "gamma3", "gamma4",
                           "gamma5", "gamma6", "gamma7", "gamma8")}
    overrides = {name: raw[name] for name in ("gamma_a", "gamma_b", "gamma_c", "gamma_e")
                 if name in raw}
    rates = detailed_balance_rates(params, **gammas, **overrides)
    return SimulationConfig(params, rates, raw.get("nbar", DEFAULT_NBAR),
                            raw.get("renormalize_thermal", False))


def _default_gammas(params: PhysicalParams) -> dict[str, float]:
    cavity = DEFAULT_GAMMA_CAVITY
    long_wave = 0.07 * params.g
    return dict(gamma1=cavity, gamma2=cavity, gamma3=long_wave, gamma4=cavity,
                gamma5=long_wave, gamma6=cavity, gamma7=cavity, gamma8=cavity)


def load_config(path) -> SimulationConfig:
    path = Path(path)
    return parse_config_text(path.read_text(), source=str(path))
