"""Experiment configuration: one TOML file per run, flags only for overrides.

The schema is fail-closed: unknown sections or keys abort with the
offending name, so a typo cannot silently fall back to a default.  Values
round-trip exactly through ``serialize`` (floats are written with repr,
which Python guarantees to re-read bit-identically).
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import abp, cone, domain, weight


class ConfigError(ValueError):
    """Invalid experiment configuration (unknown key, bad value, ...)."""


# section -> key -> (python type(s), required)
_SCHEMA = {
    "cone": {
        "kind": (str, True),
        "beta": ((int, float), False),
        "n": (int, False),
        "mask": (list, False),
    },
    "weight": {
        "kind": (str, True),
        "A": (list, False),
        "alpha": ((int, float), False),
    },
    "domain": {
        "kind": (str, True),
        "rho": ((int, float), False),
        "coeffs": (list, False),
        "path": (str, False),
        "center": (list, False),
        "modes": (list, False),
    },
    "grid": {
        "N": (int, False),
    },
    "optimize": {
        "modes": (int, False),
        "starts": (int, False),
        "seed": (int, False),
        "max_iter": (int, False),
        "method": (str, False),
        "init_amplitude": ((int, float), False),
    },
    "tolerances": {
        "ball_tol": ((int, float), False),
        "margin": ((int, float), False),
        "bracket_target": ((int, float), False),
        "tie_rel": ((int, float), False),
        "ftol_rel": ((int, float), False),
        "c_chain": ((int, float), False),
        "c_contact": ((int, float), False),
        "kappa": ((int, float), False),
        "eta": ((int, float), False),
        "b_tol": ((int, float), False),
    },
    "output": {
        "json": (str, False),
        "csv": (str, False),
        "dump_field": (str, False),
        "figures": (bool, False),
    },
}

_CONE_KINDS = ("sector", "orthant")
_WEIGHT_KINDS = ("constant", "monomial", "radial")
_DOMAIN_KINDS = ("ball", "modes", "profile-file", "disk", "blob")


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment description, section by section."""

    cone: dict = field(default_factory=dict)
    weight: dict = field(default_factory=dict)
    domain: dict = field(default_factory=dict)
    grid: dict = field(default_factory=dict)
    optimize: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)

    def build_cone(self):
        spec = self.cone
        if not spec:
            raise ConfigError("missing [cone] section")
        if spec["kind"] == "sector":
            if "beta" not in spec:
                raise ConfigError("[cone] kind=sector needs beta")
            return cone.sector(float(spec["beta"]))
        if "n" not in spec:
            raise ConfigError("[cone] kind=orthant needs n")
        n = int(spec["n"])
        mask = spec.get("mask")
        # an omitted mask means the full orthant: every axis constrained
        return cone.orthant(n, range(1, n + 1) if mask is None else tuple(mask))

    def build_weight(self):
        spec = self.weight
        if not spec:
            raise ConfigError("missing [weight] section")
        dim = self.cone.get("n", 2)
        if spec["kind"] == "constant":
            return weight.constant(dim)
        if spec["kind"] == "monomial":
            if "A" not in spec:
                raise ConfigError("[weight] kind=monomial needs A")
            return weight.monomial(tuple(float(a) for a in spec["A"]))
        if "alpha" not in spec:
            raise ConfigError("[weight] kind=radial needs alpha")
        return weight.radial_power(float(spec["alpha"]), dim)

    def build_domain(self, grid):
        """Materialize the domain; star kinds need the cap grid."""
        spec = self.domain
        if not spec:
            raise ConfigError("missing [domain] section")
        kind = spec["kind"]
        if kind == "ball":
            return domain.ball(grid, float(spec.get("rho", 1.0)))
        if kind == "modes":
            if "coeffs" not in spec:
                raise ConfigError("[domain] kind=modes needs coeffs")
            from . import optimize as _opt

            obj = _opt.ModeObjective(
                grid.cone, self.build_weight(), n=grid.resolution, modes=len(spec["coeffs"])
            )
            return obj.domain(np.asarray([float(c) for c in spec["coeffs"]]), renormalize=False)
        if kind == "profile-file":
            if "path" not in spec:
                raise ConfigError("[domain] kind=profile-file needs path")
            values = np.loadtxt(spec["path"], dtype=float, ndmin=1)
            return domain.from_profile(grid, values)
        if kind == "disk":
            if "center" not in spec or "rho" not in spec:
                raise ConfigError("[domain] kind=disk needs center and rho")
            return abp.disk([float(c) for c in spec["center"]], float(spec["rho"]))
        if "center" not in spec or "rho" not in spec or "modes" not in spec:
            raise ConfigError("[domain] kind=blob needs center, rho and modes")
        return abp.blob(
            [float(c) for c in spec["center"]], float(spec["rho"]), spec["modes"]
        )

    @property
    def resolution(self):
        return int(self.grid.get("N", 128))

    def tol(self, name, default):
        return self.tolerances.get(name, default)


def _check_section(name, table):
    schema = _SCHEMA[name]
    for key, value in table.items():
        if key not in schema:
            raise ConfigError(f"unknown key [{name}] {key!r}")
        types, _ = schema[key]
        if not isinstance(value, types) or isinstance(value, bool) != (types is bool):
            raise ConfigError(f"[{name}] {key!r} has wrong type {type(value).__name__}")
    for key, (_, required) in schema.items():
        if required and key not in table:
            raise ConfigError(f"[{name}] missing required key {key!r}")


def _validate(data):
    for name in data:
        if name not in _SCHEMA:
            raise ConfigError(f"unknown section [{name}]")
    for name, table in data.items():
        if not isinstance(table, dict):
            raise ConfigError(f"[{name}] must be a table")
        _check_section(name, table)
    kinds = (
        ("cone", _CONE_KINDS),
        ("weight", _WEIGHT_KINDS),
        ("domain", _DOMAIN_KINDS),
    )
    for name, allowed in kinds:
        if name in data and data[name].get("kind") not in allowed:
            raise ConfigError(
                f"[{name}] kind must be one of {', '.join(allowed)}; "
                f"got {data[name].get('kind')!r}"
            )


def loads(text):
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config parse error: {exc}") from exc
    _validate(data)
    return ExperimentConfig(**{k: dict(v) for k, v in data.items()})


def load(path):
    with open(path, "r", encoding="utf-8") as fh:
        return loads(fh.read())


def _toml_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        # repr round-trips exactly; force a float marker for integral values
        r = repr(v)
        return r if any(c in r for c in ".einf") else r + ".0"
    if isinstance(v, str):
        escaped = v.replace("\\", "\\\\").replace('"', '\\"')
        return f'"{escaped}"'
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    raise ConfigError(f"cannot serialize value of type {type(v).__name__}")


def serialize(cfg: ExperimentConfig):
    """Write the config back as TOML, sections and keys in schema order."""
    lines = []
    for name in _SCHEMA:
        table = getattr(cfg, name)
        if not table:
            continue
        lines.append(f"[{name}]")
        for key in _SCHEMA[name]:
            if key in table:
                lines.append(f"{key} = {_toml_value(table[key])}")
        lines.append("")
    return "\n".join(lines)
