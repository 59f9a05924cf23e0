"""
dyncrowd Resource Monitor
=========================

Wall-clock and peak resident-memory measurement around a block of work:
- Background sampling of the process RSS with psutil
- Elapsed wall-clock time
- Throughput helpers for run statistics
"""

import threading
import time
from dataclasses import dataclass
from typing import Optional

import psutil

MIB = 1024 * 1024
DEFAULT_SAMPLE_INTERVAL = 0.005  # seconds between RSS samples


@dataclass(frozen=True)
class ResourceUsage:
    """Resources used by one measured block"""
    elapsed_seconds: float
    peak_mib: float
    baseline_mib: float

    @property
    def peak_delta_mib(self) -> float:
        """Peak growth over the RSS at block entry"""
        return max(0.0, self.peak_mib - self.baseline_mib)

    def rate(self, count: int) -> float:
        """Items per second (0 when nothing was timed)"""
        return count / self.elapsed_seconds if self.elapsed_seconds > 0 else 0.0


class ResourceMonitor:
    """
    Measure elapsed time and peak RSS of a block.

    Usage::

        with ResourceMonitor() as monitor:
            run_prediction()
        usage = monitor.usage
    """

    def __init__(self, sample_interval: float = DEFAULT_SAMPLE_INTERVAL):
        self.sample_interval = sample_interval
        self._process = psutil.Process()
        self._stop = threading.Event()
        self._thread: Optional[threading.Thread] = None
        self._lock = threading.Lock()
        self._peak = 0
        self._baseline = 0
        self._start = 0.0
        self.usage: Optional[ResourceUsage] = None

    def _rss(self) -> int:
        try:
            return self._process.memory_info().rss
        except psutil.Error:
            return 0

    def _sample(self) -> None:
        rss = self._rss()
        with self._lock:
            if rss > self._peak:
                self._peak = rss

    def _sample_loop(self) -> None:
        while not self._stop.wait(self.sample_interval):
            self._sample()

    def __enter__(self) -> "ResourceMonitor":
        self._baseline = self._rss()
        self._peak = self._baseline
        self._stop.clear()
        self._thread = threading.Thread(target=self._sample_loop, name="rss-sampler", daemon=True)
        self._thread.start()
        self._start = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc_val, exc_tb) -> None:
        elapsed = time.perf_counter() - self._start
        self._stop.set()
        if self._thread is not None:
            self._thread.join()
        self._sample()
        self.usage = ResourceUsage(
            elapsed_seconds=elapsed,
            peak_mib=self._peak / MIB,
            baseline_mib=self._baseline / MIB,
        )
