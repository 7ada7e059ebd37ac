"""Counter-based, splittable random source.

Every draw is a pure function of (seed, split path, lane), so a trial's
randomness depends only on the master seed and the trial index. Work can be
split across threads in any order without changing a single bit of output.
The mixer is the splitmix64 finalizer applied to 64-bit words.
"""

from dataclasses import dataclass
from typing import Iterable, Tuple

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MUL1 = np.uint64(0xBF58476D1CE4E5B9)
_MUL2 = np.uint64(0x94D049BB133111EB)
_UNIT = 2.0 ** -53


def _words(values: Iterable[int]) -> np.ndarray:
    return np.array([int(v) & _MASK64 for v in values], dtype=np.uint64)


def _mix(z: np.ndarray) -> np.ndarray:
    # Arrays (never numpy scalars) so uint64 overflow wraps silently
    z = z + _GOLDEN
    z = (z ^ (z >> np.uint64(30))) * _MUL1
    z = (z ^ (z >> np.uint64(27))) * _MUL2
    return z ^ (z >> np.uint64(31))


def _to_unit(z: np.ndarray) -> np.ndarray:
    """Top 53 bits as a double in [0, 1)"""
    return (z >> np.uint64(11)).astype(np.float64) * _UNIT


@dataclass(frozen=True)
class RandomSource:
    """Seedable, splittable source of uniform variates with no hidden state"""

    seed: int
    path: Tuple[int, ...] = ()

    def split(self, index: int) -> "RandomSource":
        """Independent child stream identified by `index`"""
        return RandomSource(self.seed, self.path + (int(index),))

    def _state(self) -> np.ndarray:
        h = _mix(_words([self.seed]))
        for step in self.path:
            h = _mix(h ^ _words([step]))
        return h

    def uniform(self, lane: int = 0) -> float:
        """One uniform variate in [0, 1); distinct lanes are independent"""
        return float(_to_unit(_mix(self._state() ^ _words([lane])))[0])

    def uniforms(self, lanes: int) -> np.ndarray:
        """Lanes 0..lanes-1 of this stream"""
        return _to_unit(_mix(self._state() ^ np.arange(lanes, dtype=np.uint64)))

    def child_uniforms(self, indices: np.ndarray, lane: int) -> np.ndarray:
        """`split(i).uniform(lane)` for every i in `indices`, vectorized"""
        idx = np.asarray(indices, dtype=np.int64).astype(np.uint64).reshape(-1)
        h = _mix(self._state() ^ idx)
        return _to_unit(_mix(h ^ _words([lane])))
