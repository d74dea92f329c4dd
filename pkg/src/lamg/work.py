"""Work accounting in matrix-vector-multiplication equivalents.

Kernels charge raw multiply-adds (one stored off-diagonal entry touched = 1).
A meter converts to MVM-equivalents by dividing by the stored off-diagonal
count ``2 m`` of a reference (finest) operator.
"""

from contextlib import contextmanager
from contextvars import ContextVar

_active = ContextVar("lamg_work_meters", default=())


class WorkMeter:
    """Accumulates multiply-adds charged while it is active."""

    def __init__(self, unit=1.0):
        self.unit = float(unit)
        self.entries = 0.0

    @property
    def mvm(self):
        return self.entries / self.unit if self.unit > 0 else 0.0

    def __repr__(self):
        return f"WorkMeter(mvm={self.mvm:.3f})"


def charge(entries):
    """Charge ``entries`` multiply-adds to every active meter."""
    for meter in _active.get():
        meter.entries += entries


@contextmanager
def metered(unit=1.0):
    """Activate a new :class:`WorkMeter` for the duration of the block.

    Meters nest; an inner block also charges every outer meter.
    """
    meter = WorkMeter(unit)
    token = _active.set(_active.get() + (meter,))
    try:
        yield meter
    finally:
        _active.reset(token)
