"""Backend selection: compiled extension core when available, NumPy fallback.

Set ``CENSOUT_PURE=1`` in the environment to force the pure implementation.
Both backends implement the same algorithms with the same tie-breaking rules.
"""

from __future__ import annotations

import os

from . import _pycore

if os.environ.get("CENSOUT_PURE", "").strip() not in ("", "0"):
    _impl = _pycore
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _pycore

STATUS_OK = _pycore.STATUS_OK
STATUS_RANK_DEFICIENT = _pycore.STATUS_RANK_DEFICIENT
STATUS_UNBOUNDED = _pycore.STATUS_UNBOUNDED
STATUS_MAXITER = _pycore.STATUS_MAXITER


def backend_name() -> str:
    """'compiled' when the extension core is active, else 'pure'."""
    return _impl.NAME


def solve_wqr(A, z, c, tau, max_iter=0):
    return _impl.solve_wqr(A, z, c, tau, max_iter)


def km_survival(b_sorted, delta_sorted, group_first):
    return _impl.km_survival(b_sorted, delta_sorted, group_first)
