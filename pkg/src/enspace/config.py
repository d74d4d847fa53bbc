"""Scenario configuration files: flat INI sections, strict validation.

Grammar (all values SI):

    [plant]
    resistance_ohm = 0.01
    inductance_h   = 0.00112
    capacitance_f  = 0.0068

    [load]
    kind = constant | piecewise_linear | piecewise_constant | csv
    power_w = 1200.0            ; constant only
    breakpoints = 0:1200, 0.35:1200, 0.358:1600   ; t:P pairs, pwl/pwc
    csv_path = load.csv         ; csv only (columns t_seconds,power_watts)

    [controller]
    type = fblc | smc | constant_gain | brayton_moser
    objective = regulation | tracking
    v_ref_v = 80.0
    gain_k = 100.0
    eta_error = none | const:<W/s> | scaled:<c>
    smc_nonlinearity_bound = 20000.0
    smc_boundary_layer = 0.0
    cg_k1 = 0.4512
    cg_k2 = 0.45
    cg_nominal_power_w = 1200.0
    bm_k1 = 5.0
    bm_k2 = 1.5
    bm_k3 = 1.0
    bm_power_bound_w = 1700.0
    controller_r_ohm =          ; empty -> plant value (robustness knob)

    [simulation]
    dt_s = 1e-5
    t_end_s = 1.0
    initial = paper | equilibrium | <i>,<v>[,<u>]
    record_decimation = 100

    [disturbance]
    matched_power_w = 0.0

    [feasibility]
    window_s = 1.0
    check = on | off
    symmetric_qrange = true

    [output]
    csv = on
    plots = on

Unknown sections or keys are rejected.  Keys irrelevant to the chosen
controller/load kind may be omitted; defaults are the values above.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, asdict

from .errors import ConfigError
from .components import RlcParams, LoadProfile, DisturbanceProfile
from .controllers import (FblcConfig, SmcConfig, ConstantGainConfig,
                          BraytonMoserConfig)
from .simulator import Scenario

_SCHEMA = {
    "plant": {"resistance_ohm", "inductance_h", "capacitance_f"},
    "load": {"kind", "power_w", "breakpoints", "csv_path"},
    "controller": {"type", "objective", "v_ref_v", "gain_k", "eta_error",
                   "smc_nonlinearity_bound", "smc_boundary_layer",
                   "cg_k1", "cg_k2", "cg_nominal_power_w",
                   "bm_k1", "bm_k2", "bm_k3", "bm_power_bound_w",
                   "controller_r_ohm"},
    "simulation": {"dt_s", "t_end_s", "initial", "record_decimation"},
    "disturbance": {"matched_power_w"},
    "feasibility": {"window_s", "check", "symmetric_qrange"},
    "output": {"csv", "plots"},
}
_REQUIRED = ("plant", "load", "controller", "simulation")

_DEFAULTS = {
    ("controller", "objective"): "regulation",
    ("controller", "v_ref_v"): "80.0",
    ("controller", "gain_k"): "100.0",
    ("controller", "eta_error"): "none",
    ("controller", "smc_nonlinearity_bound"): "20000.0",
    ("controller", "smc_boundary_layer"): "0.0",
    ("controller", "cg_k1"): "0.4512",
    ("controller", "cg_k2"): "0.45",
    ("controller", "cg_nominal_power_w"): "1200.0",
    ("controller", "bm_k1"): "5.0",
    ("controller", "bm_k2"): "1.5",
    ("controller", "bm_k3"): "1.0",
    ("controller", "bm_power_bound_w"): "1700.0",
    ("controller", "controller_r_ohm"): "",
    ("simulation", "initial"): "equilibrium",
    ("simulation", "record_decimation"): "100",
    ("disturbance", "matched_power_w"): "0.0",
    ("feasibility", "window_s"): "1.0",
    ("feasibility", "check"): "on",
    ("feasibility", "symmetric_qrange"): "true",
    ("output", "csv"): "on",
    ("output", "plots"): "on",
}


@dataclass
class ScenarioConfig:
    """Parsed, validated file contents: one string value per (section, key)."""

    values: dict
    name: str = "scenario"

    def get(self, section, key):
        return self.values.get((section, key), _DEFAULTS.get((section, key)))

    def set(self, section, key, value):
        if key not in _SCHEMA.get(section, ()):
            raise ConfigError(f"unknown key [{section}] {key}")
        self.values[(section, key)] = str(value)

    # -- conversion ------------------------------------------------------

    def _f(self, section, key):
        raw = self.get(section, key)
        if raw is None or raw == "":
            raise ConfigError(f"missing numeric value [{section}] {key}")
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"[{section}] {key} = {raw!r} is not a number") from None

    def _load_profile(self, t_end: float) -> LoadProfile:
        kind = self.get("load", "kind")
        if kind is None:
            raise ConfigError("missing [load] kind")
        if kind == "constant":
            return LoadProfile.constant(self._f("load", "power_w"),
                                        horizon=max(t_end, 1.0) * 10.0)
        if kind == "csv":
            path = self.get("load", "csv_path")
            if not path:
                raise ConfigError("[load] kind=csv needs csv_path")
            return LoadProfile.from_csv(path)
        raw = self.get("load", "breakpoints")
        if not raw:
            raise ConfigError(f"[load] kind={kind} needs breakpoints")
        times, powers = [], []
        for item in raw.replace(";", ",").split(","):
            item = item.strip()
            if not item:
                continue
            try:
                ts, ps = item.split(":")
                times.append(float(ts))
                powers.append(float(ps))
            except ValueError:
                raise ConfigError(f"bad breakpoint entry {item!r}") from None
        return LoadProfile(kind, times, powers)

    def to_scenario(self) -> Scenario:
        params = RlcParams(self._f("plant", "resistance_ohm"),
                           self._f("plant", "inductance_h"),
                           self._f("plant", "capacitance_f"))
        t_end = self._f("simulation", "t_end_s")
        load = self._load_profile(t_end)
        ctype = self.get("controller", "type")
        if ctype not in ("fblc", "smc", "constant_gain", "brayton_moser"):
            raise ConfigError(f"unknown controller type {ctype!r}")
        v_ref = self._f("controller", "v_ref_v")
        K = self._f("controller", "gain_k")
        eta_raw = self.get("controller", "eta_error")
        if eta_raw == "none":
            eta_error = ("none",)
        elif eta_raw.startswith(("const:", "scaled:")):
            kind, val = eta_raw.split(":", 1)
            eta_error = (kind, float(val))
        else:
            raise ConfigError(f"bad eta_error {eta_raw!r}")
        raw_init = self.get("simulation", "initial")
        if raw_init in ("paper", "equilibrium"):
            initial = raw_init
        else:
            try:
                initial = tuple(float(x) for x in raw_init.split(","))
            except ValueError:
                raise ConfigError(f"bad initial {raw_init!r}") from None
            if len(initial) not in (2, 3):
                raise ConfigError("initial needs 2 or 3 comma-separated values")
        ctrl_r_raw = self.get("controller", "controller_r_ohm")
        controller_R = float(ctrl_r_raw) if ctrl_r_raw else None
        return Scenario(
            params=params, load=load, controller=ctype,
            fblc=FblcConfig(K=K, eta_error=eta_error),
            smc=SmcConfig(L_bar=self._f("controller", "smc_nonlinearity_bound"),
                          K=K,
                          boundary_layer=self._f("controller", "smc_boundary_layer")),
            constant_gain=ConstantGainConfig.for_operating_point(
                RlcParams(controller_R if controller_R is not None else params.R,
                          params.L, params.C),
                self._f("controller", "cg_nominal_power_w"), v_ref,
                K1=self._f("controller", "cg_k1"),
                K2=self._f("controller", "cg_k2")),
            brayton_moser=BraytonMoserConfig(
                K1=self._f("controller", "bm_k1"),
                K2=self._f("controller", "bm_k2"),
                K3=self._f("controller", "bm_k3"),
                Pi=self._f("controller", "bm_power_bound_w")),
            objective=self.get("controller", "objective"),
            v_ref=v_ref,
            matched=DisturbanceProfile(self._f("disturbance", "matched_power_w")),
            initial=initial,
            t_end=t_end,
            dt=self._f("simulation", "dt_s"),
            window_s=self._f("feasibility", "window_s"),
            record_decimation=int(self._f("simulation", "record_decimation")),
            controller_R=controller_R,
            name=self.name,
        )

    @property
    def feasibility_check(self) -> bool:
        return self.get("feasibility", "check") == "on"

    @property
    def symmetric_qrange(self) -> bool:
        return self.get("feasibility", "symmetric_qrange") == "true"

    @property
    def output_csv(self) -> bool:
        return self.get("output", "csv") == "on"

    @property
    def output_plots(self) -> bool:
        return self.get("output", "plots") == "on"


def parse_config_text(text: str, name: str = "scenario") -> ScenarioConfig:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config syntax error: {exc}") from None
    values = {}
    for section in cp.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        for key, val in cp.items(section):
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key [{section}] {key}")
            values[(section, key)] = val.strip()
    for section in _REQUIRED:
        if section not in cp.sections():
            raise ConfigError(f"missing required section [{section}]")
    cfg = ScenarioConfig(values, name=name)
    cfg.to_scenario()  # validate eagerly so errors surface at parse time
    return cfg


def parse_config(path) -> ScenarioConfig:
    import os
    with open(path) as fh:
        text = fh.read()
    return parse_config_text(text, name=os.path.splitext(os.path.basename(path))[0])


def emit_config(cfg: ScenarioConfig) -> str:
    """Render a config back to INI text (round-trips through parse)."""
    sections = {}
    for (section, key), val in cfg.values.items():
        sections.setdefault(section, []).append((key, val))
    out = []
    for section in _SCHEMA:
        if section not in sections:
            continue
        out.append(f"[{section}]")
        for key, val in sections[section]:
            out.append(f"{key} = {val}")
        out.append("")
    return "\n".join(out)


def apply_overrides(cfg: ScenarioConfig, overrides) -> ScenarioConfig:
    """Apply 'section.key=value' strings on top of a parsed config."""
    values = dict(cfg.values)
    for item in overrides:
        try:
            target, val = item.split("=", 1)
            section, key = target.split(".", 1)
        except ValueError:
            raise ConfigError(f"override {item!r} is not section.key=value") from None
        section, key = section.strip(), key.strip()
        if section not in _SCHEMA or key not in _SCHEMA[section]:
            raise ConfigError(f"unknown override target [{section}] {key}")
        values[(section, key)] = val.strip()
    new = ScenarioConfig(values, name=cfg.name)
    new.to_scenario()
    return new
