"""Flat ``key = value`` run configuration.

Keys carry dotted section prefixes (``quadrature.N = 64``).  Blank lines and
``#`` comments are ignored; unknown keys are rejected.  ``to_text`` writes
every key in sorted order, so ``parse(cfg.to_text()) == cfg`` and
serialization is idempotent.
"""
from __future__ import annotations

import math

from .exceptions import ConfigError

__all__ = ["RunConfig", "parse_config", "load_config", "SCHEMA"]


def _opt(conv):
    def parse(text):
        return None if text.strip().lower() in ("", "none") else conv(text)
    parse.__name__ = f"optional_{conv.__name__}"
    return parse


def _list(conv):
    def parse(text):
        text = text.strip()
        return tuple(conv(p) for p in text.split(",")) if text else ()
    parse.__name__ = f"list_{conv.__name__}"
    return parse


def _bool(text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _str(text):
    return text.strip()


def _int(text):
    return int(text.strip())


def _float(text):
    return float(text.strip())


# key -> (parser, default, check)
SCHEMA = {
    "backend.kind": (_str, "sine", lambda v: v in ("sine", "fd", "scalar", "diagonal")),
    "backend.size": (_int, 64, lambda v: v >= 1),
    "backend.lambda": (_float, math.pi**2, lambda v: v > 0),
    "backend.eigenvalues": (_list(_float), (), lambda v: all(x > 0 for x in v)),
    "backend.oversample": (_int, 4, lambda v: v >= 1),
    "spectral.rho0": (_opt(_float), None, lambda v: v is None or v > 0),
    "spectral.phi0": (_opt(_float), None, lambda v: v is None or 0 <= v < math.pi / 2),
    "spectral.d": (_opt(_float), None, lambda v: v is None or 0 < v < math.pi / 2),
    "spectral.margin": (_float, 0.05, lambda v: 0 < v < 1),
    "quadrature.N": (_int, 64, lambda v: v >= 1),
    "quadrature.N_list": (_list(_int), (4, 8, 16, 32, 64, 128), lambda v: all(x >= 1 for x in v)),
    "quadrature.alpha": (_float, 1.0, lambda v: v > 0),
    "collocation.n": (_int, 16, lambda v: v >= 1),
    "collocation.n_list": (_list(_int), (4, 8, 16, 32, 64), lambda v: all(x >= 1 for x in v)),
    "functional.kind": (_str, "quadratic", lambda v: v in ("zero", "quadratic", "multipoint")),
    "functional.mu": (_float, 0.25, lambda v: math.isfinite(v)),
    "functional.points": (_list(_float), (), lambda v: all(-1 <= x <= 1 for x in v)),
    "functional.coefficients": (_list(_float), (), lambda v: True),
    "functional.m": (_opt(_int), None, lambda v: v is None or v >= 1),
    "solver.tol": (_float, 1e-14, lambda v: v > 0),
    "solver.max_iter": (_int, 50, lambda v: v >= 1),
    "output.path": (_opt(_str), None, lambda v: True),
    "output.m": (_int, 64, lambda v: v >= 1),
    "expm.t_list": (_list(_float), (-1.0, -0.5, 0.0, 1.0), lambda v: all(-1 <= x <= 1 for x in v)),
    "bench.workers_list": (_list(_int), (1, 2, 4, 8), lambda v: all(x >= 1 for x in v)),
    "workers": (_int, 1, lambda v: v >= 1),
}


def _format(value):
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ",".join(_format(v) for v in value)
    return str(value)


class RunConfig:
    """Typed mapping over :data:`SCHEMA` keys; missing keys take defaults."""

    def __init__(self, values=None):
        self._values = {key: spec[1] for key, spec in SCHEMA.items()}
        for key, value in (values or {}).items():
            self[key] = value

    def __getitem__(self, key):
        return self._values[key]

    def __setitem__(self, key, value):
        if key not in SCHEMA:
            raise ConfigError(f"unknown config key {key!r}")
        parser, _, check = SCHEMA[key]
        if isinstance(value, str):
            try:
                value = parser(value)
            except ValueError as exc:
                raise ConfigError(f"{key}: {exc}") from None
        elif isinstance(value, list):
            value = tuple(value)
        if not check(value):
            raise ConfigError(f"{key}: value {value!r} out of range")
        self._values[key] = value

    def __eq__(self, other):
        return isinstance(other, RunConfig) and self._values == other._values

    def __repr__(self):
        return f"RunConfig({self._values!r})"

    def items(self):
        return sorted(self._values.items())

    def copy(self):
        return RunConfig(dict(self._values))

    def override(self, assignments):
        """Apply ``key=value`` strings (as given to ``--set``)."""
        for item in assignments:
            key, sep, value = item.partition("=")
            if not sep:
                raise ConfigError(f"override {item!r} is not key=value")
            self[key.strip()] = value
        return self

    def to_text(self):
        return "".join(f"{key} = {_format(value)}\n" for key, value in self.items())


def parse_config(text) -> RunConfig:
    cfg = RunConfig()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        try:
            cfg[key.strip()] = value
        except ConfigError as exc:
            raise ConfigError(f"line {lineno}: {exc}") from None
    return cfg


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
