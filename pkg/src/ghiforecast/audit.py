"""Opt-in record of which data years each fitting stage touched.

Used to check that validation-year rows never reach normalisation fitting,
feature selection or GA fitness evaluation.
"""
from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass

import numpy as np

_log: list | None = None


@dataclass(frozen=True)
class Access:
    stage: str
    years: frozenset
    rows: int


def record(stage: str, frame) -> None:
    if _log is None:
        return
    years = frozenset(int(y) for y in np.unique(frame.years)) if len(frame) else frozenset()
    _log.append(Access(stage, years, len(frame)))


@contextmanager
def recording():
    """Collect :class:`Access` entries for the duration of the block."""
    global _log
    previous, _log = _log, []
    try:
        yield _log
    finally:
        _log = previous
