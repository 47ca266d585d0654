"""
Timing and counters for the fitting solver.
"""

import time
from collections import defaultdict
from typing import Any, Dict, Optional

from loguru import logger


class SolveMetrics:
    """Collect solver counters and per-phase wall time."""

    def __init__(self):
        self.factorizations = 0
        self.pd_iterations = 0
        self.outer_iterations = 0
        self.correspondences_built = 0
        self.seconds_by_phase = defaultdict(float)
        self.calls_by_phase = defaultdict(int)

    def record_phase(self, phase: str, elapsed: float):
        self.seconds_by_phase[phase] += elapsed
        self.calls_by_phase[phase] += 1

    def record_factorization(self):
        self.factorizations += 1

    def record_pd_iterations(self, count: int):
        self.pd_iterations += count

    def record_outer_iteration(self, n_correspondences: int):
        self.outer_iterations += 1
        self.correspondences_built += n_correspondences

    def get_metrics(self) -> Dict[str, Any]:
        """
        Get current metrics.

        Returns:
            Dictionary of counters and rounded phase timings
        """
        return {
            "factorizations": self.factorizations,
            "pd_iterations": self.pd_iterations,
            "outer_iterations": self.outer_iterations,
            "correspondences_built": self.correspondences_built,
            "seconds_by_phase": {k: round(v, 4) for k, v in self.seconds_by_phase.items()},
            "calls_by_phase": dict(self.calls_by_phase),
        }

    def reset(self):
        self.__init__()

    def log_metrics(self):
        logger.info(f"📊 Solve metrics: {self.get_metrics()}")


class PhaseTimer:
    """Context manager timing one solver phase, optionally recorded into a SolveMetrics."""

    def __init__(self, name: str = "phase", metrics: Optional[SolveMetrics] = None):
        self.name = name
        self.metrics = metrics
        self.start_time = None
        self.elapsed = None

    def __enter__(self):
        self.start_time = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.elapsed = time.perf_counter() - self.start_time
        if self.metrics is not None:
            self.metrics.record_phase(self.name, self.elapsed)

        if exc_type is None:
            logger.debug(f"⏱️ {self.name} completed in {self.elapsed:.3f}s")
        else:
            logger.warning(f"⏱️ {self.name} failed after {self.elapsed:.3f}s")
        return False

    def get_elapsed(self) -> float:
        return self.elapsed if self.elapsed is not None else 0.0


_global_metrics = SolveMetrics()


def get_metrics_collector() -> SolveMetrics:
    """Get the global solve metrics instance."""
    return _global_metrics
