"""Training kernel selection: compiled extension if built, NumPy otherwise."""

from __future__ import annotations

import logging

from . import _sgns_py

logger = logging.getLogger(__name__)

try:
    from . import _sgns_inner

    train_shard = _sgns_inner.train_shard
    BACKEND = "cython"
except ImportError:
    train_shard = _sgns_py.train_shard
    BACKEND = "python"
    logger.warning("compiled training kernel unavailable, using the NumPy fallback "
                   "(expect 1-2 orders of magnitude slower training)")


def backend_name() -> str:
    return BACKEND


def get_train_shard(backend: str | None = None):
    """The kernel for an explicit backend name, or the auto-selected one."""
    if backend is None:
        return train_shard
    if backend == "python":
        return _sgns_py.train_shard
    if backend == "cython":
        from . import _sgns_inner
        return _sgns_inner.train_shard
    raise ValueError(f"unknown backend {backend!r}")
