"""Intermittent sensing schedules.

A switching sequence {t_i} with t_1 = 0 partitions time into half-open
windows: [t_{2k-1}, t_{2k}) belongs to the first sensing regime (state
measured on (0, Y)) and [t_{2k}, t_{2k+1}) to the second (state measured on
(Y, 1)).  Indices follow the 1-based convention of the window algebra, so
``instants[0]`` is t_1.
"""

import bisect
from dataclasses import dataclass

import numpy as np

from .errors import BeyondHorizonError, NonmonotoneSequenceError

SENSE1 = "Sense1"
SENSE2 = "Sense2"

#: switching instants (seconds) shared by the shipped two-subdomain presets
PRESET_INSTANTS = tuple(t * 1e-3 for t in (0.0, 1.0, 2.0, 2.8, 3.9, 5.0, 5.5, 6.5, 7.0, 7.6, 8.0))


@dataclass(frozen=True)
class SwitchingSequence:
    instants: np.ndarray
    dwell_bounds: tuple | None = None   # (T1_lo, T1_hi, T2_lo, T2_hi) or None

    def __post_init__(self):
        inst = np.asarray(self.instants, dtype=float)
        object.__setattr__(self, "instants", inst)
        if len(inst) < 2:
            raise NonmonotoneSequenceError("need at least two switching instants")
        if inst[0] != 0.0:
            raise NonmonotoneSequenceError(f"first instant must be 0, got {inst[0]}")
        if np.any(np.diff(inst) <= 0):
            raise NonmonotoneSequenceError("instants must be strictly increasing")

    @property
    def horizon(self) -> float:
        return float(self.instants[-1])


def preset_schedule() -> SwitchingSequence:
    """The switching sequence used by the shipped presets."""
    return SwitchingSequence(instants=np.array(PRESET_INSTANTS))


def uniform_schedule(gap1: float, gap2: float, horizon: float) -> SwitchingSequence:
    """Alternating windows of fixed lengths gap1 (regime 1) and gap2 (regime 2)."""
    if gap1 <= 0 or gap2 <= 0:
        raise NonmonotoneSequenceError("window lengths must be positive")
    instants = [0.0]
    while instants[-1] < horizon:
        instants.append(instants[-1] + (gap1 if len(instants) % 2 == 1 else gap2))
    return SwitchingSequence(instants=np.array(instants))


def random_schedule(bounds: tuple, horizon: float, seed: int) -> SwitchingSequence:
    """Windows drawn uniformly inside the dwell bounds (T1_lo, T1_hi, T2_lo, T2_hi)."""
    t1_lo, t1_hi, t2_lo, t2_hi = bounds
    rng = np.random.default_rng(seed)
    instants = [0.0]
    while instants[-1] < horizon:
        lo, hi = (t1_lo, t1_hi) if len(instants) % 2 == 1 else (t2_lo, t2_hi)
        instants.append(instants[-1] + rng.uniform(lo, hi))
    return SwitchingSequence(instants=np.array(instants), dwell_bounds=bounds)


def active_regime(seq: SwitchingSequence, t: float) -> str:
    """Sense1 on [t_{2k-1}, t_{2k}), Sense2 on [t_{2k}, t_{2k+1})."""
    if t < 0:
        raise ValueError(f"negative time {t}")
    inst = seq.instants
    if t >= inst[-1]:
        raise BeyondHorizonError(f"t={t} is past the final instant {inst[-1]}")
    idx = bisect.bisect_right(inst, t) - 1
    return SENSE1 if idx % 2 == 0 else SENSE2


def validate_dwell(seq: SwitchingSequence) -> tuple:
    """Empirical dwell bounds (T1_lo, T1_hi, T2_lo, T2_hi) scanned from the
    instants; regime-1 windows are the odd-index gaps t_{2k} - t_{2k-1}."""
    inst = seq.instants
    if len(inst) < 3:
        raise NonmonotoneSequenceError("need at least three instants to measure dwell")
    gaps = np.diff(inst)
    if np.any(gaps <= 0):
        raise NonmonotoneSequenceError("instants must be strictly increasing")
    gaps1 = gaps[0::2]
    gaps2 = gaps[1::2]
    return (float(gaps1.min()), float(gaps1.max()),
            float(gaps2.min()), float(gaps2.max()))


def anchor_instants(seq: SwitchingSequence, k: int) -> tuple:
    """Comparison instants for cycle k >= 2: ((t_{2k-3}, t_{2k-1}),
    (t_{2k-2}, t_{2k})), 1-based as in the window algebra."""
    if k < 2:
        raise IndexError(f"anchor instants need k >= 2, got {k} "
                         "(the first cycle runs with frozen gains)")
    inst = seq.instants
    needed = 2 * k
    if needed > len(inst):
        raise IndexError(f"schedule has {len(inst)} instants, cycle k={k} needs {needed}")
    t = lambda i: float(inst[i - 1])   # 1-based accessor
    return (t(2 * k - 3), t(2 * k - 1)), (t(2 * k - 2), t(2 * k))
