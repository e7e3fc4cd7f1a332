"""
Configuration files and named presets.

A configuration is a JSON object. A single operating point lists the six
physical keys (``gamma_m``, ``kappa``, ``delta0``, ``g0``, ``drive_e``,
``n_th``), optionally on top of a named ``preset``::

    {"gamma_m": 0.01, "kappa": 0.1, "delta0": 1.0, "g0": 1e-4, "drive_e": 500, "n_th": 10}

A sweep has a ``base`` (an object of the same form), an ``axis1`` and an
optional ``axis2``::

    {"base": {"preset": "fig1"},
     "axis1": {"name": "drive_e", "from": 0, "to": 500, "points": 11},
     "axis2": {"name": "g0", "values": [1e-4, 5e-4, 1e-3]}}

All rates are in units of the mechanical frequency.
"""

import json
import math
from dataclasses import dataclass, fields

import numpy as np

from .errors import ConfigError
from .model import SystemParams

PHYSICAL_KEYS = ("gamma_m", "kappa", "delta0", "g0", "drive_e", "n_th")
PARAM_KEYS = PHYSICAL_KEYS + ("omega_m", "lock_detuning")
AXIS_NAMES = PHYSICAL_KEYS
SCALES = ("linear", "log")

# Sweep output columns, in file order.
COLUMNS = (
    "drive_e", "g0", "kappa", "gamma_m", "delta0", "n_th",
    "q_s", "alpha_s", "delta_eff", "g_eff", "stable",
    "nu1", "nu2", "c_mec", "c_opt", "c_tot", "delta_c", "mutual_info",
)

_FIG = dict(gamma_m=0.01, kappa=0.1, delta0=1.0, n_th=10.0)


def _hz(mech_hz, **rates_hz):
    """Rates given as frequencies (any common unit) relative to omega_m."""
    return {k: v / mech_hz for k, v in rates_hz.items()}


PARAM_PRESETS = {
    "fig1": (
        "weak coupling, red detuned: gamma_m=0.01, kappa=0.1, delta0=1, n_th=10, g0=1e-4, E=500",
        SystemParams(g0=1e-4, drive_e=500.0, **_FIG),
    ),
    "fig4_strong": (
        "coupling above the mutual-coherence threshold: fig1 with g0=1e-3, E=300",
        SystemParams(g0=1e-3, drive_e=300.0, **_FIG),
    ),
    "nist_microwave": (
        "electromechanical circuit, omega_m/2pi = 14.98 MHz, gamma_m/2pi = 9.2 Hz, "
        "kappa/2pi = 1.17 MHz, G0/2pi = 145 Hz",
        SystemParams(
            delta0=1.0, n_th=10.0, drive_e=500.0,
            **_hz(14.98e6, gamma_m=9.2, kappa=1.17e6, g0=145.0),
        ),
    ),
    "optomech_crystal": (
        "optomechanical crystal, omega_m/2pi = 3.68 GHz, gamma_m/2pi = 35 kHz, "
        "kappa/2pi = 500 MHz, G0/2pi = 910 kHz",
        SystemParams(
            delta0=1.0, n_th=10.0, drive_e=500.0,
            **_hz(3.68e9, gamma_m=35e3, kappa=500e6, g0=910e3),
        ),
    ),
}


def _number(value, key):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key} must be a number, got {value!r}", key)
    if not math.isfinite(value):
        raise ConfigError(f"{key} must be finite, got {value!r}", key)
    return float(value)


def _check_keys(obj, allowed, where):
    if not isinstance(obj, dict):
        raise ConfigError(f"{where} must be a JSON object", where)
    for key in obj:
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r} in {where}", key)


@dataclass(frozen=True)
class SweepAxis:
    """One sweep dimension.

    Either a range (``start``, ``stop``, ``points``, ``scale``) or an
    explicit tuple of ``values``.
    """

    name: str
    start: float = None
    stop: float = None
    points: int = None
    scale: str = "linear"
    values: tuple = None

    def __post_init__(self):
        if self.name not in AXIS_NAMES:
            raise ConfigError(f"axis name must be one of {', '.join(AXIS_NAMES)}, got {self.name!r}", "name")
        if self.values is not None:
            vals = tuple(_number(v, "values") for v in self.values)
            if not vals:
                raise ConfigError("axis values must not be empty", "values")
            object.__setattr__(self, "values", vals)
            return
        for key, value in (("from", self.start), ("to", self.stop), ("points", self.points)):
            if value is None:
                raise ConfigError(f"axis {self.name!r} is missing {key!r}", key)
        start, stop = _number(self.start, "from"), _number(self.stop, "to")
        if isinstance(self.points, bool) or not isinstance(self.points, int) or self.points < 2:
            raise ConfigError(f"points must be an integer >= 2, got {self.points!r}", "points")
        if not start < stop:
            raise ConfigError(f"axis {self.name!r} needs from < to, got {start} >= {stop}", "from")
        if self.scale not in SCALES:
            raise ConfigError(f"scale must be 'linear' or 'log', got {self.scale!r}", "scale")
        if self.scale == "log" and start <= 0:
            raise ConfigError("log scale needs from > 0", "from")
        object.__setattr__(self, "start", start)
        object.__setattr__(self, "stop", stop)

    def grid(self):
        if self.values is not None:
            return np.array(self.values, dtype=float)
        if self.scale == "log":
            return np.logspace(math.log10(self.start), math.log10(self.stop), self.points)
        return np.linspace(self.start, self.stop, self.points)


@dataclass(frozen=True)
class SweepSpec:
    base: SystemParams
    axis1: SweepAxis
    axis2: SweepAxis = None
    outputs: tuple = COLUMNS

    def __post_init__(self):
        if self.axis2 is not None and self.axis2.name == self.axis1.name:
            raise ConfigError("axis1 and axis2 sweep the same parameter", "axis2")
        outputs = tuple(self.outputs)
        for col in outputs:
            if col not in COLUMNS:
                raise ConfigError(f"unknown output column {col!r}", "outputs")
        if not outputs:
            raise ConfigError("outputs must name at least one column", "outputs")
        object.__setattr__(self, "outputs", outputs)

    def points(self):
        """Parameter sets in grid order: axis2-major, then axis1."""
        outer = self.axis2.grid() if self.axis2 is not None else [None]
        out = []
        for v2 in outer:
            for v1 in self.axis1.grid():
                changes = {self.axis1.name: float(v1)}
                if v2 is not None:
                    changes[self.axis2.name] = float(v2)
                out.append(self.base.replace(**changes))
        return out


def _sweep_preset(description, base, axis1, axis2):
    return description, SweepSpec(base, axis1, axis2)


_E_AXIS = SweepAxis("drive_e", 0.0, 500.0, 11)

SWEEP_PRESETS = {
    "fig1": _sweep_preset(
        "coherence vs drive for g0 in {1e-4, 5e-4, 1e-3}",
        SystemParams(**_FIG), _E_AXIS, SweepAxis("g0", values=(1e-4, 5e-4, 1e-3)),
    ),
    "fig2": _sweep_preset(
        "coherence vs drive and cavity decay, kappa from 0.1 to 10 (log), g0=1e-3",
        SystemParams(g0=1e-3, **_FIG), _E_AXIS, SweepAxis("kappa", 0.1, 10.0, 9, "log"),
    ),
    "fig3": _sweep_preset(
        "coherence vs drive for n_th in {1, 10, 100}, g0=1e-4",
        SystemParams(g0=1e-4, **_FIG), _E_AXIS, SweepAxis("n_th", values=(1.0, 10.0, 100.0)),
    ),
    "fig4": _sweep_preset(
        "coherence gap vs drive and coupling, g0 from 1e-4 to 1e-2 (log), kappa=0.1",
        SystemParams(**_FIG), _E_AXIS, SweepAxis("g0", 1e-4, 1e-2, 9, "log"),
    ),
}


def params_from_dict(obj, where="config"):
    """Validated :class:`SystemParams` from a mapping.

    Keys left out are taken from ``preset`` when one is named; otherwise
    every physical key is required.
    """
    _check_keys(obj, PARAM_KEYS + ("preset",), where)
    if "preset" in obj:
        name = obj["preset"]
        if name not in PARAM_PRESETS:
            raise ConfigError(f"unknown parameter preset {name!r}", "preset")
        base = PARAM_PRESETS[name][1]
    else:
        for key in PHYSICAL_KEYS:
            if key not in obj:
                raise ConfigError(f"missing key {key!r} in {where}", key)
        base = SystemParams()
    values = {f.name: getattr(base, f.name) for f in fields(base)}
    for key, value in obj.items():
        if key == "preset":
            continue
        if key == "lock_detuning":
            if not isinstance(value, bool):
                raise ConfigError("lock_detuning must be true or false", key)
        else:
            value = _number(value, key)
        # validate the key on its own so the error can name it
        try:
            SystemParams().replace(**{key: value})
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid {key}: {exc}", key) from exc
        values[key] = value
    return SystemParams(**values)


def axis_from_dict(obj, where):
    _check_keys(obj, ("name", "from", "to", "points", "scale", "values"), where)
    if "name" not in obj:
        raise ConfigError(f"missing key 'name' in {where}", "name")
    if "values" in obj:
        extra = [k for k in ("from", "to", "points", "scale") if k in obj]
        if extra:
            raise ConfigError(f"{where} gives both values and {extra[0]!r}", extra[0])
        if not isinstance(obj["values"], list):
            raise ConfigError("values must be a list", "values")
        return SweepAxis(obj["name"], values=tuple(obj["values"]))
    return SweepAxis(
        obj["name"], obj.get("from"), obj.get("to"), obj.get("points"), obj.get("scale", "linear")
    )


def sweep_from_dict(obj):
    _check_keys(obj, ("base", "axis1", "axis2", "outputs"), "sweep")
    if "base" not in obj:
        raise ConfigError("missing key 'base' in sweep", "base")
    base = params_from_dict(obj["base"], "base")
    axis1 = axis_from_dict(obj["axis1"], "axis1")
    axis2 = axis_from_dict(obj["axis2"], "axis2") if obj.get("axis2") is not None else None
    outputs = obj.get("outputs", COLUMNS)
    if not isinstance(outputs, (list, tuple)):
        raise ConfigError("outputs must be a list of column names", "outputs")
    return SweepSpec(base, axis1, axis2, tuple(outputs))


def parse_config(obj):
    """A :class:`SystemParams` or, when ``axis1`` is present, a :class:`SweepSpec`."""
    if isinstance(obj, dict) and "axis1" in obj:
        return sweep_from_dict(obj)
    return params_from_dict(obj)


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}", "path") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}", "path") from exc
    return parse_config(obj)


def preset(name, kind=None):
    """Look up a preset. ``kind`` is ``"params"``, ``"sweep"`` or None for either.

    Sweep presets win when a name exists in both tables and ``kind`` is None.
    """
    if kind in (None, "sweep") and name in SWEEP_PRESETS:
        return SWEEP_PRESETS[name][1]
    if kind in (None, "params") and name in PARAM_PRESETS:
        return PARAM_PRESETS[name][1]
    raise ConfigError(f"unknown preset {name!r}", "preset")
