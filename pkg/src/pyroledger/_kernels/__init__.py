"""Hot-kernel backend selection.

Imports the compiled Cython core when it is available, otherwise the
pure-Python fallback. Setting the environment variable
``PYROLEDGER_PURE=1`` forces the fallback, which is mainly useful for the
backend-comparison benchmark and for debugging.
"""

import os

from . import _fallback

if os.environ.get("PYROLEDGER_PURE", "") not in ("", "0"):
    _impl = _fallback
else:
    try:
        from . import _core as _impl
    except ImportError:
        _impl = _fallback

IMPLEMENTATION = _impl.IMPLEMENTATION
label_components = _impl.label_components
severity_loss_sum = _impl.severity_loss_sum

__all__ = ["IMPLEMENTATION", "label_components", "severity_loss_sum"]
