"""Kernel estimators for weakly dependent time series.

Thin wrapper over the compiled core; see the package README for the
estimator and verification APIs.
"""

from ._kernrates import *  # noqa: F401,F403
from ._kernrates import __doc__ as _core_doc

__all__ = [name for name in dir() if not name.startswith("_")]
__doc__ = _core_doc or __doc__
