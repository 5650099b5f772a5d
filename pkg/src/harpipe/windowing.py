"""Frame sampling, overlapping sliding windows, and per-period fusion.

A window covers n consecutive sampled frames and steps forward by m frames, so
consecutive windows overlap by n - m frames and every interior stretch of m
frames (a "prediction period") is covered by n/m windows. Period j's final
decision averages the probability vectors of all windows that overlap it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Optional, Sequence

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class WindowConfig:
    class_names: tuple[str, ...]
    n: int = 16            # frames per window
    sr: float = 5.0        # sampling rate, frames/s consumed
    m: int = 4             # new frames per window step
    theta: float = 0.4     # decision threshold on the fused maximum
    majority_vote: bool = False  # vote over argmaxes instead of averaging probs

    def __post_init__(self):
        if self.n <= 0:
            raise ConfigError("n must be positive")
        if not (0 < self.m <= self.n):
            raise ConfigError("m must be in (0, n]")
        if self.n % self.m != 0:
            raise ConfigError("m must divide n")
        if self.sr <= 0:
            raise ConfigError("sr must be positive")
        if not (0 < self.theta < 1):
            raise ConfigError("theta must be in (0, 1)")
        if not self.class_names:
            raise ConfigError("class_names must be non-empty")

    @property
    def t_sw(self) -> float:
        """Window duration, seconds."""
        return self.n / self.sr

    @property
    def t_pw(self) -> float:
        """Period duration (time between window starts), seconds."""
        return self.m / self.sr

    @property
    def windows_per_period(self) -> int:
        return self.n // self.m


def sample_stride(fps: float, sr: float) -> int:
    """Frame-stride for subsampling an fps stream down to sr (half rounds up)."""
    if fps < sr:
        raise ConfigError(f"stream fps {fps} below sampling rate {sr}")
    return int(math.floor(fps / sr + 0.5))


def sample_frames(stream: Iterable, fps: float, sr: float) -> Iterator:
    """Yield every stride-th item of the stream, timestamps untouched."""
    stride = sample_stride(fps, sr)
    for i, item in enumerate(stream):
        if i % stride == 0:
            yield item


def windows_for_period(j: int, cfg: WindowConfig) -> range:
    """Indices of the windows overlapping prediction period j."""
    if j < 0:
        raise ValueError("period index must be non-negative")
    return range(max(0, j - cfg.windows_per_period + 1), j + 1)


def fuse(
    contributions: Sequence[np.ndarray],
    theta: float,
    majority_vote: bool = False,
) -> tuple[Optional[int], np.ndarray]:
    """Combine per-window class probabilities into one decision.

    Returns (class index or None, mean probability vector). The mean's argmax
    wins if it reaches theta; ties break to the lowest class index. With
    majority_vote, the modal argmax wins instead (same tie-break) and theta is
    ignored.
    """
    if not contributions:
        raise ValueError("no contributions to fuse")
    stacked = np.stack([np.asarray(c, dtype=np.float64) for c in contributions])
    mean = stacked.mean(axis=0)
    if majority_vote:
        votes = np.bincount(stacked.argmax(axis=1), minlength=stacked.shape[1])
        return int(votes.argmax()), mean
    best = int(mean.argmax())
    if mean[best] >= theta:
        return best, mean
    return None, mean


@dataclass
class PredictionPeriod:
    """Accumulated window outputs for one m-frame span of the sampled stream."""

    period_index: int
    contributions: list = field(default_factory=list)
    decision: Optional[str] = "pending"
    mean_probs: Optional[np.ndarray] = None
    decided_at_sample: Optional[int] = None

    def t_start(self, cfg: WindowConfig) -> float:
        return self.period_index * cfg.m / cfg.sr

    def t_end(self, cfg: WindowConfig) -> float:
        return (self.period_index + 1) * cfg.m / cfg.sr


ClassifyFn = Callable[[list], np.ndarray]


class WindowScheduler:
    """Assemble windows from sampled frames, classify them, fuse per period.

    Frames are fed in sample order; a frame may be None (nothing usable for the
    classifier this sample), in which case every window containing it is
    skipped. ``classify`` receives the list of n frames and returns a
    probability vector, or raises/returns None to signal a failed window.
    Period j finalizes as soon as window j (its last overlapping window) is
    resolved; flush() emits trailing periods that got at least one contribution.
    """

    def __init__(self, cfg: WindowConfig, classify: ClassifyFn):
        self.cfg = cfg
        self.classify = classify
        self._frames: dict[int, object] = {}
        self._periods: dict[int, PredictionPeriod] = {}
        self._finalized_up_to = -1
        self._last_sample = -1
        self.failed_windows: list[int] = []

    def _period(self, j: int) -> PredictionPeriod:
        if j not in self._periods:
            self._periods[j] = PredictionPeriod(period_index=j)
        return self._periods[j]

    def feed(self, sample_index: int, frame) -> list[PredictionPeriod]:
        """Consume one sampled frame; return any periods finalized by it."""
        if sample_index != self._last_sample + 1:
            raise ValueError("sampled frames must arrive consecutively")
        self._last_sample = sample_index
        self._frames[sample_index] = frame

        out: list[PredictionPeriod] = []
        n, m = self.cfg.n, self.cfg.m
        if sample_index + 1 >= n and (sample_index + 1 - n) % m == 0:
            w = (sample_index + 1 - n) // m
            frames = [self._frames[s] for s in range(w * m, w * m + n)]
            probs = None
            if all(f is not None for f in frames):
                try:
                    probs = self.classify(frames)
                except Exception:
                    probs = None
            if probs is None:
                self.failed_windows.append(w)
            else:
                for j in range(w, w + self.cfg.windows_per_period):
                    self._period(j).contributions.append(np.asarray(probs, dtype=np.float64))
            out.append(self._finalize(w, decided_at_sample=sample_index + 1))
            # frames older than the next window's start are no longer needed
            for s in list(self._frames):
                if s < (w + 1) * m:
                    del self._frames[s]
        return out

    def _finalize(self, j: int, decided_at_sample: Optional[int]) -> PredictionPeriod:
        period = self._period(j)
        if period.contributions:
            idx, mean = fuse(period.contributions, self.cfg.theta, self.cfg.majority_vote)
            period.decision = self.cfg.class_names[idx] if idx is not None else None
            period.mean_probs = mean
        else:
            period.decision = None
            period.mean_probs = None
        period.decided_at_sample = decided_at_sample
        self._finalized_up_to = j
        del self._periods[j]
        return period

    def flush(self) -> list[PredictionPeriod]:
        """End of stream: finalize remaining periods that saw any contribution."""
        out = []
        for j in sorted(self._periods):
            if self._periods[j].contributions:
                out.append(self._finalize(j, decided_at_sample=self._last_sample + 1))
        self._periods.clear()
        return out
