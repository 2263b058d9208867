"""Effect catalog: parameter schemas, validation, and lookup.

Each effect registers once with a parameter schema.  Numeric parameters may
be given either as plain values or as ``{"min": a, "max": b}`` ranges; ranges
are resolved to concrete values with one uniform draw each at apply time, in
schema order, so a node's sampled parameters depend only on its own stream.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Callable

from ..errors import ParamError
from ..raster import Raster
from ..rng import Substream

PHASES = ("ink", "paper", "post")


@dataclass(frozen=True)
class Field:
    """One parameter: type tag, default, and admissible values."""

    name: str
    type: str  # int | float | bool | str | color | rect | path
    default: object
    lo: float | None = None
    hi: float | None = None
    choices: tuple[str, ...] | None = None
    nullable: bool = False


@dataclass(frozen=True)
class EffectDef:
    """A catalog entry.

    ``phase`` is the canonical catalog grouping ("ink", "paper", "post" or
    "multi"); ``default_phase`` is where the built-in default pipeline places
    the effect.  ``identity`` holds parameters under which the effect is a
    bit-exact no-op, or None when the effect has no neutral configuration
    (quantizers like jpeg/faxify/dithering, or sheet replacement).
    """

    kind: str
    phase: str
    default_phase: str
    fn: Callable[[Raster, dict, Substream], Raster]
    fields: tuple[Field, ...]
    midrange: dict
    identity: dict | None = None
    changes_dims: bool = False

    def defaults(self) -> dict:
        return {f.name: f.default for f in self.fields}


_REGISTRY: dict[str, EffectDef] = {}


def register(defn: EffectDef) -> EffectDef:
    if defn.kind in _REGISTRY:
        raise ValueError(f"duplicate effect kind '{defn.kind}'")
    if defn.default_phase not in PHASES:
        raise ValueError(f"bad default phase '{defn.default_phase}' for '{defn.kind}'")
    _REGISTRY[defn.kind] = defn
    return defn


def catalog() -> dict[str, EffectDef]:
    """All registered effects, keyed by kind."""
    return dict(_REGISTRY)


def get_effect(kind: str) -> EffectDef:
    try:
        return _REGISTRY[kind]
    except KeyError:
        raise ParamError(f"unknown effect kind '{kind}'") from None


def _is_range(v) -> bool:
    return isinstance(v, dict) and set(v.keys()) == {"min", "max"}


def _check_number(f: Field, v, what: str):
    if f.type == "int":
        if isinstance(v, bool) or not isinstance(v, int):
            raise ParamError(f"{what} for '{f.name}' must be an integer, got {v!r}")
    else:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ParamError(f"{what} for '{f.name}' must be a number, got {v!r}")
    if f.lo is not None and v < f.lo or f.hi is not None and v > f.hi:
        raise ParamError(f"{what} for '{f.name}' must be in [{f.lo}, {f.hi}], got {v!r}")


def _validate_value(f: Field, v):
    """Type/range check one parameter; returns the canonical value."""
    if v is None:
        if f.nullable:
            return None
        raise ParamError(f"'{f.name}' may not be null")
    if f.type in ("int", "float"):
        if _is_range(v):
            _check_number(f, v["min"], "range min")
            _check_number(f, v["max"], "range max")
            if v["min"] > v["max"]:
                raise ParamError(f"range for '{f.name}' has min > max")
            return {"min": v["min"], "max": v["max"]}
        _check_number(f, v, "value")
        return int(v) if f.type == "int" else float(v)
    if f.type == "bool":
        if not isinstance(v, bool):
            raise ParamError(f"'{f.name}' must be a boolean, got {v!r}")
        return v
    if f.type == "str":
        if not isinstance(v, str):
            raise ParamError(f"'{f.name}' must be a string, got {v!r}")
        if f.choices and v not in f.choices:
            raise ParamError(f"'{f.name}' must be one of {sorted(f.choices)}, got {v!r}")
        return v
    if f.type == "color":
        if isinstance(v, int) and not isinstance(v, bool):
            v = [v, v, v]
        if not (isinstance(v, (list, tuple)) and len(v) == 3):
            raise ParamError(f"'{f.name}' must be [r, g, b] or a gray level, got {v!r}")
        vals = []
        for c in v:
            if isinstance(c, bool) or not isinstance(c, int) or not 0 <= c <= 255:
                raise ParamError(f"'{f.name}' components must be integers in [0, 255]")
            vals.append(c)
        return tuple(vals)
    if f.type == "rect":
        if not (isinstance(v, (list, tuple)) and len(v) == 4):
            raise ParamError(f"'{f.name}' must be [x0, y0, x1, y1], got {v!r}")
        vals = []
        for c in v:
            if isinstance(c, bool) or not isinstance(c, int):
                raise ParamError(f"'{f.name}' coordinates must be integers")
            vals.append(c)
        return tuple(vals)
    if f.type == "path":
        if not isinstance(v, str):
            raise ParamError(f"'{f.name}' must be a path string, got {v!r}")
        return v
    raise ParamError(f"unhandled field type '{f.type}' for '{f.name}'")


def validate_params(kind: str, params: dict | None) -> dict:
    """Check params against the kind's schema and fill in defaults."""
    defn = get_effect(kind)
    params = dict(params or {})
    known = {f.name for f in defn.fields}
    for key in params:
        if key not in known:
            raise ParamError(f"unknown parameter '{key}' for effect '{kind}'")
    out = {}
    for f in defn.fields:
        out[f.name] = _validate_value(f, params[f.name]) if f.name in params else f.default
    return out


def resolve_params(kind: str, params: dict, rng: Substream) -> dict:
    """Replace {"min","max"} ranges with sampled values, one draw per range."""
    defn = get_effect(kind)
    out = {}
    for f in defn.fields:
        v = params.get(f.name, f.default)
        if f.type in ("int", "float") and _is_range(v):
            if f.type == "int":
                v = int(rng.integers(v["min"], v["max"] + 1))
            else:
                v = float(rng.uniform_in(v["min"], v["max"]))
        out[f.name] = v
    return out
