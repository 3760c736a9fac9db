"""Experiment configuration: INI-style sections of key = value pairs.

The schema is validated strictly; unknown sections or keys are rejected so
parameter drift cannot pass silently.  ``parse -> serialize -> parse`` is
the identity on the parsed values.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass

from ..errors import ConfigError
from ..microstructure import Bar, UnitCell
from ..solvers import BoundaryPulse, FemConfig, StandardPdConfig

_SCHEMA = {
    "bar": ("length", "cell_length", "alpha", "beta"),
    "materials": ("e_stiff", "e_compliant", "rho_stiff", "rho_compliant", "area"),
    "pulse": ("u0", "duration", "a0"),
    "kernel": ("order", "n_max", "num_quad", "truncation_tol"),
    "solver": ("dt", "t_end", "probes", "record_stride"),
    "standard_pd": ("node_spacing", "horizon"),
    "fem": ("elements_per_stiff_segment", "elements_per_compliant_segment",
            "mass_lumping"),
}

_REQUIRED = {
    "bar": ("length", "cell_length", "alpha", "beta"),
    "materials": ("e_stiff", "e_compliant", "rho_stiff", "rho_compliant"),
    "pulse": ("u0", "duration"),
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated parameters of one comparison experiment."""

    bar: Bar
    area: float
    pulse: BoundaryPulse
    kernel_order: int
    kernel_n_max: int
    kernel_num_quad: int
    kernel_truncation_tol: float
    dt: float | None
    t_end: float | None
    probes: tuple[float, ...] | None
    record_stride: int
    pd_node_spacing: float
    pd_horizon: float
    fem: FemConfig

    @property
    def cell(self) -> UnitCell:
        return self.bar.cell

    def effective_t_end(self) -> float:
        """Comparison window end; defaults to four pulse durations so the
        pulse reaches and passes the midpoint probe."""
        return self.t_end if self.t_end is not None else 4.0 * self.pulse.duration

    def effective_probes(self) -> tuple[float, ...]:
        if self.probes is not None:
            return self.probes
        return (self.bar.length / 2.0,)

    def standard_pd_config(self) -> StandardPdConfig:
        return StandardPdConfig.from_cell(self.cell, self.pd_node_spacing,
                                          self.pd_horizon)


def _get(parser, section, key, default=None):
    if parser.has_option(section, key):
        return parser.get(section, key)
    return default


def _float(raw, where):
    try:
        return float(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}: expected a number, got {raw!r}") from None


def _int(raw, where):
    try:
        return int(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}: expected an integer, got {raw!r}") from None


def _bool(raw, where):
    lowered = str(raw).strip().lower()
    if lowered in ("true", "yes", "on", "1"):
        return True
    if lowered in ("false", "no", "off", "0"):
        return False
    raise ConfigError(f"{where}: expected a boolean, got {raw!r}")


def parse_config(text: str) -> ExperimentConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc

    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        for key in parser.options(section):
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
    for section, keys in _REQUIRED.items():
        if not parser.has_section(section):
            raise ConfigError(f"missing required config section [{section}]")
        for key in keys:
            if not parser.has_option(section, key):
                raise ConfigError(f"missing required key {key!r} in [{section}]")

    try:
        cell = UnitCell(
            alpha=_float(parser.get("bar", "alpha"), "[bar] alpha"),
            beta=_float(parser.get("bar", "beta"), "[bar] beta"),
            cell_length=_float(parser.get("bar", "cell_length"), "[bar] cell_length"),
            e_stiff=_float(parser.get("materials", "e_stiff"), "[materials] e_stiff"),
            e_compliant=_float(parser.get("materials", "e_compliant"),
                               "[materials] e_compliant"),
            rho_stiff=_float(parser.get("materials", "rho_stiff"),
                             "[materials] rho_stiff"),
            rho_compliant=_float(parser.get("materials", "rho_compliant"),
                                 "[materials] rho_compliant"),
        )
        bar = Bar(length=_float(parser.get("bar", "length"), "[bar] length"),
                  cell=cell)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    a0_raw = _get(parser, "pulse", "a0", "peak")
    a0 = None if str(a0_raw).strip().lower() == "peak" else _float(a0_raw, "[pulse] a0")
    pulse = BoundaryPulse(
        u0=_float(parser.get("pulse", "u0"), "[pulse] u0"),
        duration=_float(parser.get("pulse", "duration"), "[pulse] duration"),
        a0=a0,
    )

    order = _int(_get(parser, "kernel", "order", "4"), "[kernel] order")
    n_max = _int(_get(parser, "kernel", "n_max", "12"), "[kernel] n_max")
    num_quad = _int(_get(parser, "kernel", "num_quad", "1024"), "[kernel] num_quad")
    trunc = _float(_get(parser, "kernel", "truncation_tol", "1e-4"),
                   "[kernel] truncation_tol")

    dt_raw = _get(parser, "solver", "dt", "auto")
    dt = None if str(dt_raw).strip().lower() == "auto" else _float(dt_raw, "[solver] dt")
    t_end_raw = _get(parser, "solver", "t_end", "auto")
    t_end = (None if str(t_end_raw).strip().lower() == "auto"
             else _float(t_end_raw, "[solver] t_end"))
    probes_raw = str(_get(parser, "solver", "probes", "midpoint")).strip()
    if probes_raw.lower() == "midpoint":
        probes = None
    else:
        probes = tuple(_float(p, "[solver] probes")
                       for p in probes_raw.split(",") if p.strip())
        if not probes:
            raise ConfigError("[solver] probes: empty probe list")
    stride = _int(_get(parser, "solver", "record_stride", "1"),
                  "[solver] record_stride")
    if stride < 1:
        raise ConfigError("[solver] record_stride must be >= 1")

    node_spacing = _float(_get(parser, "standard_pd", "node_spacing", "0.005"),
                          "[standard_pd] node_spacing")
    horizon_raw = _get(parser, "standard_pd", "horizon")
    horizon = (4.0 * node_spacing if horizon_raw is None
               else _float(horizon_raw, "[standard_pd] horizon"))

    fem = FemConfig(
        elements_per_stiff_segment=_int(
            _get(parser, "fem", "elements_per_stiff_segment", "8"),
            "[fem] elements_per_stiff_segment"),
        elements_per_compliant_segment=_int(
            _get(parser, "fem", "elements_per_compliant_segment", "16"),
            "[fem] elements_per_compliant_segment"),
        mass_lumping=_bool(_get(parser, "fem", "mass_lumping", "true"),
                           "[fem] mass_lumping"),
    )

    area = _float(_get(parser, "materials", "area", "1.0"), "[materials] area")
    if area <= 0.0:
        raise ConfigError("[materials] area must be positive")

    return ExperimentConfig(
        bar=bar, area=area, pulse=pulse,
        kernel_order=order, kernel_n_max=n_max, kernel_num_quad=num_quad,
        kernel_truncation_tol=trunc,
        dt=dt, t_end=t_end, probes=probes, record_stride=stride,
        pd_node_spacing=node_spacing, pd_horizon=horizon,
        fem=fem,
    )


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def serialize_config(config: ExperimentConfig) -> str:
    """Canonical text form; parsing it reproduces ``config`` exactly."""
    cell = config.cell
    parser = configparser.ConfigParser()
    parser["bar"] = {
        "length": f"{config.bar.length:.17g}",
        "cell_length": f"{cell.cell_length:.17g}",
        "alpha": f"{cell.alpha:.17g}",
        "beta": f"{cell.beta:.17g}",
    }
    parser["materials"] = {
        "e_stiff": f"{cell.e_stiff:.17g}",
        "e_compliant": f"{cell.e_compliant:.17g}",
        "rho_stiff": f"{cell.rho_stiff:.17g}",
        "rho_compliant": f"{cell.rho_compliant:.17g}",
        "area": f"{config.area:.17g}",
    }
    parser["pulse"] = {
        "u0": f"{config.pulse.u0:.17g}",
        "duration": f"{config.pulse.duration:.17g}",
        "a0": "peak" if config.pulse.a0 is None else f"{config.pulse.a0:.17g}",
    }
    parser["kernel"] = {
        "order": str(config.kernel_order),
        "n_max": str(config.kernel_n_max),
        "num_quad": str(config.kernel_num_quad),
        "truncation_tol": f"{config.kernel_truncation_tol:.17g}",
    }
    parser["solver"] = {
        "dt": "auto" if config.dt is None else f"{config.dt:.17g}",
        "t_end": "auto" if config.t_end is None else f"{config.t_end:.17g}",
        "probes": ("midpoint" if config.probes is None
                   else ", ".join(f"{p:.17g}" for p in config.probes)),
        "record_stride": str(config.record_stride),
    }
    parser["standard_pd"] = {
        "node_spacing": f"{config.pd_node_spacing:.17g}",
        "horizon": f"{config.pd_horizon:.17g}",
    }
    parser["fem"] = {
        "elements_per_stiff_segment": str(config.fem.elements_per_stiff_segment),
        "elements_per_compliant_segment": str(config.fem.elements_per_compliant_segment),
        "mass_lumping": "true" if config.fem.mass_lumping else "false",
    }
    buffer = io.StringIO()
    parser.write(buffer)
    return buffer.getvalue()
