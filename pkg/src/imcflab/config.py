"""Flat key-value experiment configuration with dotted sections.

Unknown keys are errors: drift between a config file and the schema fails
fast instead of running a silently different experiment.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field


class ConfigError(ValueError):
    pass


def _float_list(text: str):
    return [float(x) for x in text.replace(",", " ").split()]


_SCHEMA = {
    "family.kind": str,
    "family.r0": float,
    "family.m": float,
    "family.well_depth": float,
    "family.well_width": float,
    "family.well_center": float,
    "sequence.rule": str,              # reciprocal | masses | well_widths
    "sequence.count": int,
    "sequence.masses": _float_list,
    "sequence.well_widths": _float_list,
    "grids.n_theta": int,
    "grids.n_phi": int,
    "grids.n_t": int,
    "grids.T": float,
    "collar.count": int,
    "bounds.H0": float,
    "bounds.H1": float,
    "bounds.A1": float,
    "bounds.I0": float,
    "samples.n_sphere": int,
    "samples.n_levels": int,
    "samples.leaf_stride": int,
    "seed": int,
}

_DEFAULTS = {
    "family.kind": "schwarzschild",
    "family.r0": 1.0,
    "family.m": 0.0,
    "family.well_depth": 0.0,
    "family.well_width": 0.25,
    "family.well_center": 0.5,
    "sequence.rule": "reciprocal",
    "sequence.count": 20,
    "sequence.masses": [],
    "sequence.well_widths": [],
    "grids.n_theta": 64,
    "grids.n_phi": 128,
    "grids.n_t": 256,
    "grids.T": 1.0,
    "collar.count": 5,
    "bounds.H0": 1e-3,
    "bounds.H1": 10.0,
    "bounds.A1": 20.0,
    "bounds.I0": 1.0,
    "samples.n_sphere": 12,
    "samples.n_levels": 4,
    "samples.leaf_stride": 8,
    "seed": 0,
}


@dataclass
class ExperimentConfig:
    values: dict = dc_field(default_factory=lambda: dict(_DEFAULTS))

    def __getitem__(self, key):
        return self.values[key]

    def member_params(self):
        """The per-member family parameter list of the sequence."""
        rule = self.values["sequence.rule"]
        if rule == "reciprocal":
            return [("m", 1.0 / i) for i in range(1, self.values["sequence.count"] + 1)]
        if rule == "masses":
            return [("m", m) for m in self.values["sequence.masses"]]
        if rule == "well_widths":
            return [("well_width", w) for w in self.values["sequence.well_widths"]]
        raise ConfigError(f"unknown sequence rule {rule!r}")

    def collar_schedule(self):
        """t1_k = T/(10k), t2_k = T - T/(10k) for k = 1..count."""
        T = self.values["grids.T"]
        return [(T / (10.0 * k), T - T / (10.0 * k))
                for k in range(1, self.values["collar.count"] + 1)]

    def echo(self) -> str:
        return "; ".join(f"{k}={self.values[k]}" for k in sorted(self.values))


def parse_config(text: str) -> ExperimentConfig:
    values = dict(_DEFAULTS)
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, val = (part.strip() for part in line.split("=", 1))
        if key not in _SCHEMA:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = _SCHEMA[key](val)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from exc
    cfg = ExperimentConfig(values)
    cfg.collar_schedule()
    return cfg


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        return parse_config(fh.read())
