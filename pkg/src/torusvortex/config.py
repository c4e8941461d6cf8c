"""TOML run configuration, validated before any computation.

Example::

    scenario = "rdl-run"
    vortices = [[0.5, 0.4, 1], [0.5, 0.6, -1]]   # or: figure = "fig3_left"
    Q0 = "auto"
    dt = 1e-4
    t_end = 0.1

    [geometry]
    l = 1.0
    w = 1.0

    [nlse]
    eps = 0.05
    grid = 256

Unknown keys at any level raise :class:`ConfigError`.
"""
from __future__ import annotations

import sys
from dataclasses import dataclass, field

from .errors import ConfigError
from .green import TorusGeometry
from .renorm import VortexConfiguration

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

SCENARIO_NAMES = ("green-table", "rdl-run", "field-build", "nlse-run", "track", "compare",
                  "gamma", "figures", "selftest")

_SCHEMA = {
    "scenario": str,
    "out": str,
    "figure": str,
    "vortices": list,
    "Q0": (str, list),
    "dt": float,
    "t_end": float,
    "stop_dist": float,
    "record_every": int,
    "geometry": {"l": float, "w": float},
    "nlse": {"eps": float, "grid": (int, list), "dt": float, "dt_factor": float, "t_end": float,
             "snapshot_every": int, "profile": str},
    "compare": {"eps_ladder": list, "grids": list, "t_end": float, "dt_factor": float,
                "snapshots": int, "reference": str, "max_jump": float},
    "core": {"ladder": list, "nodes": int, "gamma": float},
    "green": {"grid": int},
    "track": {"max_jump": float},
}


def _check(table: dict, schema: dict, where: str):
    for key, value in table.items():
        if key not in schema:
            raise ConfigError(f"unknown key {where}{key}")
        kind = schema[key]
        if isinstance(kind, dict):
            if not isinstance(value, dict):
                raise ConfigError(f"{where}{key} must be a table")
            _check(value, kind, f"{where}{key}.")
            continue
        kinds = kind if isinstance(kind, tuple) else (kind,)
        ok = any(isinstance(value, k) or (k is float and isinstance(value, int) and not isinstance(value, bool))
                 for k in kinds)
        if not ok or isinstance(value, bool):
            raise ConfigError(f"{where}{key} has the wrong type ({type(value).__name__})")


@dataclass
class RunConfig:
    raw: dict = field(default_factory=dict)

    # -- construction ------------------------------------------------------
    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        _check(data, _SCHEMA, "")
        cfg = cls(dict(data))
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            with open(path, "rb") as fh:
                data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        return cls.from_dict(data)

    def validate(self):
        s = self.raw.get("scenario")
        if s is not None and s not in SCENARIO_NAMES:
            raise ConfigError(f"scenario must be one of {SCENARIO_NAMES}")
        if "vortices" in self.raw and "figure" in self.raw:
            raise ConfigError("give either vortices or figure, not both")
        if "vortices" in self.raw or "figure" in self.raw:
            self.configuration()
        q0 = self.raw.get("Q0", "auto")
        if isinstance(q0, str) and q0 != "auto":
            raise ConfigError('Q0 must be "auto" or a pair of numbers')
        if isinstance(q0, list) and (len(q0) != 2 or not all(isinstance(v, (int, float)) for v in q0)):
            raise ConfigError("Q0 must be a pair of numbers")
        ref = self.section("compare").get("reference", "integrate")
        if ref not in ("integrate", "analytic"):
            raise ConfigError('compare.reference must be "integrate" or "analytic"')
        prof = self.section("nlse").get("profile", "optimal")
        if prof not in ("optimal", "tanh"):
            raise ConfigError('nlse.profile must be "optimal" or "tanh"')
        for key in ("dt", "t_end", "stop_dist"):
            if key in self.raw and not self.raw[key] > 0:
                raise ConfigError(f"{key} must be positive")

    # -- accessors ---------------------------------------------------------
    def get(self, key, default=None):
        return self.raw.get(key, default)

    def section(self, name: str) -> dict:
        return self.raw.get(name, {})

    @property
    def geometry(self) -> TorusGeometry:
        g = self.section("geometry")
        try:
            return TorusGeometry(float(g.get("l", 1.0)), float(g.get("w", 1.0)))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def configuration(self) -> VortexConfiguration:
        if "figure" in self.raw:
            from . import scenarios

            try:
                return scenarios.get(self.raw["figure"]).configuration()
            except KeyError as exc:
                raise ConfigError(str(exc)) from exc
        pts = self.raw.get("vortices")
        if pts is None:
            raise ConfigError("configuration needs vortices or figure")
        try:
            if not all(len(p) == 3 for p in pts):
                raise ValueError("each vortex is [x, y, d]")
            return VortexConfiguration.from_points(pts, self.geometry)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid vortices: {exc}") from exc

    def Q0(self, a: VortexConfiguration):
        from .renorm import Q0_of

        q0 = self.raw.get("Q0", "auto")
        return Q0_of(a) if q0 == "auto" else [float(q0[0]), float(q0[1])]
