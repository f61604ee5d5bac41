"""``key = value`` run configuration with position-annotated errors.

Recognized keys::

    field.kind    example | custom          field.lambda, field.alpha (example)
    field.phi     radial expression in r    field.g  angular catalog name (custom)
    trial.kind    gaussian_radial | gaussian_times_basis | piecewise_power | random | zero
    trial.l, trial.m, trial.s (spin 1|2), trial.width, trial.epsilon, trial.seed, trial.l_max
    grid.n_r, grid.n_theta, grid.n_phi, grid.r_min, grid.r_max, grid.radial_map

Lines starting with ``#`` and blank lines are ignored.
"""

from dataclasses import dataclass, field

import numpy as np

from . import calculus, fields, quadrature
from .errors import OutOfRangeError, SingularityError
from .expr import ExpressionError
from .hardy import NearExtremalProfile


class ConfigError(ValueError):
    def __init__(self, message, source="<config>", line=None, column=None):
        self.source, self.line, self.column = source, line, column
        where = source if line is None else f"{source}:{line}:{column or 1}"
        super().__init__(f"{where}: {message}")


def _int(v):
    return int(v)


def _float(v):
    out = float(v)
    if not np.isfinite(out):
        raise ValueError("value must be finite")
    return out


def _choice(*options):
    def conv(v):
        if v not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return v

    return conv


def _text(v):
    if not v:
        raise ValueError("empty value")
    return v


KEYS = {
    "field.kind": _choice("example", "custom"),
    "field.lambda": _float,
    "field.alpha": _float,
    "field.phi": _text,
    "field.g": _text,
    "trial.kind": _choice("gaussian_radial", "gaussian_times_basis", "piecewise_power", "random", "zero"),
    "trial.l": _int,
    "trial.m": _int,
    "trial.s": _int,
    "trial.width": _float,
    "trial.epsilon": _float,
    "trial.seed": _int,
    "trial.l_max": _int,
    "grid.n_r": _int,
    "grid.n_theta": _int,
    "grid.n_phi": _int,
    "grid.r_min": _float,
    "grid.r_max": _float,
    "grid.radial_map": _choice("linear", "log"),
}


@dataclass(frozen=True)
class Entry:
    value: object
    raw: str
    line: int
    column: int


@dataclass
class RunConfig:
    entries: dict = field(default_factory=dict)
    source: str = "<config>"

    def get(self, key, default=None):
        e = self.entries.get(key)
        return default if e is None else e.value

    def has_section(self, prefix):
        return any(k.startswith(prefix + ".") for k in self.entries)

    def error(self, key, message):
        e = self.entries.get(key)
        if e is None:
            return ConfigError(f"{key}: {message}", self.source)
        return ConfigError(f"{key}: {message}", self.source, e.line, e.column)

    def set(self, key, raw, line=None, column=None):
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}", self.source, line, column)
        try:
            value = KEYS[key](raw)
        except ValueError as exc:
            raise ConfigError(f"bad value {raw!r} for {key}: {exc}", self.source, line, column) from None
        self.entries[key] = Entry(value, raw, line, column)


def parse_config(text, source="<config>"):
    cfg = RunConfig(source=source)
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in line:
            col = len(line) - len(line.lstrip()) + 1
            raise ConfigError("expected 'key = value'", source, lineno, col)
        key_part, value_part = line.split("=", 1)
        key = key_part.strip()
        key_col = len(key_part) - len(key_part.lstrip()) + 1
        if not key:
            raise ConfigError("missing key before '='", source, lineno, 1)
        value = value_part.strip()
        value_col = len(key_part) + 2 + len(value_part) - len(value_part.lstrip())
        if key in cfg.entries:
            raise ConfigError(f"duplicate key {key!r}", source, lineno, key_col)
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}", source, lineno, key_col)
        cfg.set(key, value, lineno, value_col)
    return cfg


def load_config(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot read config: {exc}", str(path)) from None
    return parse_config(text, str(path))


def apply_overrides(cfg, pairs):
    """Apply ``key=value`` command-line overrides on top of a parsed config."""
    for i, pair in enumerate(pairs, start=1):
        if "=" not in pair:
            raise ConfigError(f"override {pair!r} is not key=value", f"--set #{i}")
        key, value = (p.strip() for p in pair.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}", f"--set #{i}")
        saved_source = cfg.source
        cfg.source = f"--set #{i}"
        try:
            cfg.set(key, value)
        finally:
            cfg.source = saved_source
    return cfg


# --- builders ---------------------------------------------------------------


def build_field_spec(cfg, default="example"):
    """TransversalFieldSpec from the ``field.*`` keys; ``default=None`` means A = 0
    when no field keys are present."""
    kind = cfg.get("field.kind")
    if kind is None:
        if cfg.has_section("field"):
            raise cfg.error("field.kind", "required when other field.* keys are set")
        if default is None:
            return fields.zero_spec()
        kind = default
    try:
        if kind == "example":
            lam = cfg.get("field.lambda", 1.0)
            alpha = cfg.get("field.alpha", 0.0)
            if lam == 0:
                raise cfg.error("field.lambda", "must be nonzero")
            try:
                return fields.example_field(lam, alpha)
            except SingularityError as exc:
                raise cfg.error("field.alpha", str(exc)) from None
        src = cfg.get("field.phi")
        if src is None:
            raise cfg.error("field.phi", "required for field.kind = custom")
        try:
            radial = fields.parse_radial_expression(src)
        except ExpressionError as exc:
            e = cfg.entries["field.phi"]
            if exc.position is not None and e.line is not None:
                raise ConfigError(f"field.phi: {exc}", cfg.source, e.line, e.column + exc.position) from None
            raise cfg.error("field.phi", str(exc)) from None
        except SingularityError as exc:
            raise cfg.error("field.phi", str(exc)) from None
        name = cfg.get("field.g", "z/r")
        try:
            angular = fields.angular_profile(name)
        except KeyError as exc:
            raise cfg.error("field.g", exc.args[0]) from None
        return fields.TransversalFieldSpec(radial, angular, f"custom(phi={src}, g={name})")
    except OutOfRangeError as exc:
        raise ConfigError(str(exc), cfg.source) from None


def build_grid(cfg, **defaults):
    kw = dict(n_r=96, n_theta=32, n_phi=64, r_min=1e-6, r_max=30.0, radial_map="linear")
    kw.update(defaults)
    for key in ("n_r", "n_theta", "n_phi", "r_min", "r_max", "radial_map"):
        kw[key] = cfg.get(f"grid.{key}", kw[key])
    try:
        return quadrature.grid3d(**kw)
    except ValueError as exc:
        bad = next((f"grid.{k}" for k in ("n_r", "n_theta", "n_phi", "r_min", "r_max") if f"grid.{k}" in cfg.entries), "grid")
        raise cfg.error(bad, str(exc)) from None


def build_trial(cfg, rng=None, default="gaussian_times_basis"):
    """Trial field from ``trial.*``; ``rng`` feeds the ``random`` kind.

    The basis kind defaults to l = m = s = 1: a non-radial field whose identity
    terms do not cancel pointwise, so a coarse grid shows up in the residual."""
    kind = cfg.get("trial.kind", default)
    width = cfg.get("trial.width", 1.0)
    if width <= 0:
        raise cfg.error("trial.width", "must be positive")
    if kind == "zero":
        return calculus.zero_field()
    if kind == "gaussian_radial":
        return calculus.gaussian_radial(width)
    if kind == "gaussian_times_basis":
        l, m, s = cfg.get("trial.l", 1), cfg.get("trial.m", 1), cfg.get("trial.s", 1)
        if l < 0:
            raise cfg.error("trial.l", "must be >= 0")
        if abs(m) > l:
            raise cfg.error("trial.m", f"|m| must not exceed l = {l}")
        if s not in (1, 2):
            raise cfg.error("trial.s", "spin component must be 1 or 2")
        return calculus.gaussian_times_basis(l, m, s, width)
    if kind == "piecewise_power":
        eps = cfg.get("trial.epsilon", 0.1)
        try:
            return NearExtremalProfile(eps).field()
        except ValueError as exc:
            raise cfg.error("trial.epsilon", str(exc)) from None
    if rng is None:
        rng = np.random.default_rng(cfg.get("trial.seed", 0))
    l_max = cfg.get("trial.l_max", 3)
    if l_max < 0:
        raise cfg.error("trial.l_max", "must be >= 0")
    return calculus.random_gaussian_field(rng, l_max)
