"""The effect catalog.

Importing this package registers every built-in effect.  Look effects up
with :func:`catalog` / :func:`get_effect`; validate and resolve parameters
with :func:`validate_params` / :func:`resolve_params`.
"""

from .registry import (
    EffectDef,
    Field,
    catalog,
    get_effect,
    register,
    resolve_params,
    validate_params,
)

# registration happens at import time, one module per canonical phase group
from . import ink as _ink  # noqa: E402,F401
from . import paper as _paper  # noqa: E402,F401
from . import post as _post  # noqa: E402,F401
from . import multi as _multi  # noqa: E402,F401

__all__ = [
    "EffectDef",
    "Field",
    "catalog",
    "get_effect",
    "register",
    "resolve_params",
    "validate_params",
]
