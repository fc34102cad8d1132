"""Line-oriented scenario configuration: `section.key = value`.

Sections: substance, grid, scheme, scenario, run.  `#` starts a comment.
Unknown keys are errors; every physical value is SI.  parse -> serialize ->
parse is the identity on all fields.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .eos import Substance
from .grid import Grid
from .integrator import SchemeConfig


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioSpec:
    kind: str                      # isolated_square | bubble_tanh | custom
    r_frac: float = 0.35
    n_gas: float = 358.2996        # mol/m^3
    n_liquid: float = 9058.3724    # mol/m^3
    T_init: float = 345.0          # K
    w: float = 1.0e5               # tanh sharpness
    T_top: float = 345.0           # K, bubble_tanh Dirichlet
    T_bottom: float = 348.0        # K, bubble_tanh Dirichlet
    n_init: float = 5000.0         # mol/m^3, custom uniform state

    def __post_init__(self):
        if self.kind not in ("isolated_square", "bubble_tanh", "custom"):
            raise ConfigError(f"unknown scenario.kind {self.kind!r}")
        if not 0.0 < self.r_frac < 1.0:
            raise ConfigError("scenario.r_frac must lie in (0, 1)")


@dataclass(frozen=True)
class RunSpec:
    n_steps: int
    snapshot_every: int = 0        # 0: only initial and final snapshots
    output_dir: str = "out"

    def __post_init__(self):
        if self.n_steps < 1:
            raise ConfigError("run.n_steps must be at least 1")
        if self.snapshot_every < 0:
            raise ConfigError("run.snapshot_every must be nonnegative")


@dataclass(frozen=True)
class ScenarioConfig:
    substance: Substance
    grid: Grid
    scheme: SchemeConfig
    scenario: ScenarioSpec
    run: RunSpec


_FLOAT, _INT, _STR = "float", "int", "str"

# (type, required, default); domain centered on the origin, so grid needs
# only the full extents
_SCHEMA = {
    "substance": {
        "molar_weight": (_FLOAT, True, None),
        "T_crit": (_FLOAT, True, None),
        "P_crit": (_FLOAT, True, None),
        "acentric": (_FLOAT, True, None),
        "cp0": (_FLOAT, True, None),
        "cp1": (_FLOAT, True, None),
        "cp2": (_FLOAT, True, None),
        "cp3": (_FLOAT, True, None),
        "theta0": (_FLOAT, True, None),
        "T0": (_FLOAT, False, 298.15),
        "P0": (_FLOAT, False, 1.0e5),
    },
    "grid": {
        "nx": (_INT, True, None),
        "ny": (_INT, True, None),
        "Lx": (_FLOAT, True, None),
        "Ly": (_FLOAT, True, None),
    },
    "scheme": {
        "dt": (_FLOAT, True, None),
        "eta": (_FLOAT, True, None),
        "xi": (_FLOAT, True, None),
        "heat_coeff": (_FLOAT, True, None),
        "outer_tol": (_FLOAT, False, 1e-3),
        "max_outer_iters": (_INT, False, 10),
        "linear_tol": (_FLOAT, False, 1e-10),
        "convection_mode": (_STR, False, "skew"),
        "linear_solver": (_STR, False, "direct"),
        "gamma_t_field": (_STR, False, "prev_iter"),
    },
    "scenario": {
        "kind": (_STR, True, None),
        "r_frac": (_FLOAT, False, None),
        "n_gas": (_FLOAT, False, None),
        "n_liquid": (_FLOAT, False, None),
        "T_init": (_FLOAT, False, None),
        "w": (_FLOAT, False, None),
        "T_top": (_FLOAT, False, None),
        "T_bottom": (_FLOAT, False, None),
        "n_init": (_FLOAT, False, None),
    },
    "run": {
        "n_steps": (_INT, True, None),
        "snapshot_every": (_INT, False, 0),
        "output_dir": (_STR, False, "out"),
    },
}


def _convert(kind, raw, where):
    try:
        if kind == _FLOAT:
            return float(raw)
        if kind == _INT:
            return int(raw)
        if raw in ("true", "false"):
            return raw == "true"
        return raw
    except ValueError as err:
        raise ConfigError(f"{where}: cannot parse {raw!r} as {kind}") from err


def parse_config(text: str) -> ScenarioConfig:
    values = {section: {} for section in _SCHEMA}
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'section.key = value'")
        key_part, value = (p.strip() for p in line.split("=", 1))
        if key_part.count(".") != 1:
            raise ConfigError(f"line {lineno}: key must be 'section.key'")
        section, key = key_part.split(".")
        if section not in _SCHEMA:
            raise ConfigError(f"line {lineno}: unknown section {section!r}")
        if key not in _SCHEMA[section]:
            raise ConfigError(f"line {lineno}: unknown key {section}.{key}")
        if key in values[section]:
            raise ConfigError(f"line {lineno}: duplicate key {section}.{key}")
        kind = _SCHEMA[section][key][0]
        values[section][key] = _convert(kind, value, f"line {lineno} ({section}.{key})")

    for section, schema in _SCHEMA.items():
        for key, (kind, required, default) in schema.items():
            if key not in values[section]:
                if required:
                    raise ConfigError(f"missing required key {section}.{key}")
                if default is not None:
                    values[section][key] = default

    try:
        sub = values["substance"]
        substance = Substance(
            molar_weight=sub["molar_weight"], T_crit=sub["T_crit"],
            P_crit=sub["P_crit"], acentric=sub["acentric"],
            cp_coeffs=(sub["cp0"], sub["cp1"], sub["cp2"], sub["cp3"]),
            theta0=sub["theta0"], T0=sub["T0"], P0=sub["P0"])
        gv = values["grid"]
        grid = Grid(nx=gv["nx"], ny=gv["ny"], Lx=gv["Lx"], Ly=gv["Ly"],
                    origin=(-gv["Lx"] / 2.0, -gv["Ly"] / 2.0))
        scheme = SchemeConfig(**values["scheme"])
        scenario = ScenarioSpec(**values["scenario"])
        run = RunSpec(**values["run"])
    except (ValueError, TypeError) as err:
        if isinstance(err, ConfigError):
            raise
        raise ConfigError(str(err)) from err
    return ScenarioConfig(substance=substance, grid=grid, scheme=scheme,
                          scenario=scenario, run=run)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def serialize_config(cfg: ScenarioConfig) -> str:
    sub = cfg.substance
    sections = {
        "substance": {
            "molar_weight": sub.molar_weight, "T_crit": sub.T_crit,
            "P_crit": sub.P_crit, "acentric": sub.acentric,
            "cp0": sub.cp_coeffs[0], "cp1": sub.cp_coeffs[1],
            "cp2": sub.cp_coeffs[2], "cp3": sub.cp_coeffs[3],
            "theta0": sub.theta0, "T0": sub.T0, "P0": sub.P0,
        },
        "grid": {"nx": cfg.grid.nx, "ny": cfg.grid.ny,
                 "Lx": cfg.grid.Lx, "Ly": cfg.grid.Ly},
        "scheme": {k: getattr(cfg.scheme, k) for k in _SCHEMA["scheme"]},
        "scenario": {k: getattr(cfg.scenario, k) for k in _SCHEMA["scenario"]},
        "run": {k: getattr(cfg.run, k) for k in _SCHEMA["run"]},
    }
    lines = []
    for section, kv in sections.items():
        for key, value in kv.items():
            lines.append(f"{section}.{key} = {_fmt(value)}")
    return "\n".join(lines) + "\n"
