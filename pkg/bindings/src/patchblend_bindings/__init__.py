"""Foreign-callable deflicker boundary.

Exposes the sequence deflicker on in-memory arrays so an external sampling
loop can call it without going through files or the CLI.  Errors never
propagate as exceptions: every call returns a structured result carrying an
error code and message instead, so a host process cannot be taken down by a
bad input.
"""

from .binding import (
    ERROR_CODES,
    OK,
    ERR_CONFIG,
    ERR_SHAPE,
    ERR_INTERNAL,
    BindingResult,
    bind_deflicker,
    bind_version,
)

__all__ = [
    "ERROR_CODES",
    "OK",
    "ERR_CONFIG",
    "ERR_SHAPE",
    "ERR_INTERNAL",
    "BindingResult",
    "bind_deflicker",
    "bind_version",
]
