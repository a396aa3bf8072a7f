"""Kernel backend selection.

The compiled extension is preferred; ``PQEXT_BACKEND=py`` (or a missing /
broken build) selects the numpy fallback. Both expose the same functions
with identical bit-exact semantics.
"""

import os

from . import _pykern

_forced = os.environ.get("PQEXT_BACKEND", "").lower()

if _forced == "py":
    _impl = _pykern
else:
    try:
        from . import _corekern as _impl  # type: ignore[attr-defined]
    except ImportError:
        if _forced == "c":
            raise
        _impl = _pykern

BACKEND_NAME = _impl.BACKEND_NAME
TOY = _impl.TOY
PRODUCTION = _impl.PRODUCTION
expand = _impl.expand
commit = _impl.commit
verify = _impl.verify

fallback = _pykern
