"""
Performance monitoring for the decision, checking and scanning operations

Each call gets its own Timer, so decisions running in different threads never share
timing state; the aggregated counters sit behind a lock.
"""
import copy
import json
import logging
import os
import threading
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from datetime import datetime
from typing import Dict, Iterator, Optional

logger = logging.getLogger(__name__)

# Counters kept next to the timing fields, and the metadata key that feeds each one
COUNTERS = {
    "closure": {"total_formulas": "sigma_size"},
    "type_enumeration": {"total_types": "types"},
    "elimination": {"total_rounds": "rounds"},
    "model_check": {"total_worlds": "worlds"},
    "derivation_check": {"total_lines": "lines"},
    "puzzle_scan": {"total_worlds_scanned": "worlds_scanned"},
}


@dataclass
class Timer:
    """One running measurement; metadata collects what the operation reports back"""
    operation: str
    metadata: Dict = field(default_factory=dict)
    start_time: float = field(default_factory=time.perf_counter)


def _empty_entry(operation: str) -> Dict:
    entry = {"calls": 0, "failures": 0, "total_time": 0.0, "max_time": 0.0, "avg_time": 0.0}
    entry.update({counter: 0 for counter in COUNTERS.get(operation, {})})
    return entry


class PerformanceMonitor:
    """
    Aggregated timings per operation plus an optional JSON-lines performance log
    """

    def __init__(self, log_file: Optional[str] = None):
        self.log_file = log_file
        self._lock = threading.Lock()
        self.metrics: Dict[str, Dict] = {}
        self.reset_metrics()

    def configure(self, log_file: Optional[str] = None):
        """Point the monitor at a new performance log, creating its directory"""
        if log_file:
            log_dir = os.path.dirname(log_file)
            if log_dir:
                os.makedirs(log_dir, exist_ok=True)
        self.log_file = log_file

    def start_timer(self, operation: str, metadata: Optional[Dict] = None) -> Timer:
        return Timer(operation, dict(metadata or {}))

    def stop_timer(self, timer: Timer, success: bool = True, result_metadata: Optional[Dict] = None) -> float:
        """
        Record a finished measurement

        Args:
            timer: Value returned by start_timer
            success: False when the operation raised
            result_metadata: Counters reported by the operation

        Returns:
            Elapsed time in seconds
        """
        elapsed = time.perf_counter() - timer.start_time
        timer.metadata.update(result_metadata or {})

        with self._lock:
            entry = self.metrics.setdefault(timer.operation, _empty_entry(timer.operation))
            entry["calls"] += 1
            if not success:
                entry["failures"] += 1
            entry["total_time"] += elapsed
            entry["max_time"] = max(entry["max_time"], elapsed)
            entry["avg_time"] = entry["total_time"] / entry["calls"]
            for counter, key in COUNTERS.get(timer.operation, {}).items():
                entry[counter] += timer.metadata.get(key, 0)
            self._write_log(timer.operation, elapsed, success, timer.metadata)

        return elapsed

    @contextmanager
    def track(self, operation: str, **metadata) -> Iterator[Dict]:
        """
        Time the enclosed block; the yielded dict takes the result counters

            with performance_monitor.track("closure") as result:
                sigma = closure(formula)
                result["sigma_size"] = sigma.size
        """
        timer = self.start_timer(operation, metadata)
        result: Dict = {}
        try:
            yield result
        except BaseException:
            self.stop_timer(timer, success=False, result_metadata=result)
            raise
        self.stop_timer(timer, result_metadata=result)

    def _write_log(self, operation, elapsed, success, metadata):
        logger.debug(f"{operation} finished in {elapsed:.4f}s ({metadata})")
        if not self.log_file:
            return
        entry = {
            "timestamp": datetime.now().isoformat(),
            "operation": operation,
            "elapsed_time": elapsed,
            "success": success,
            "metadata": metadata,
        }
        try:
            with open(self.log_file, "a") as f:
                f.write(json.dumps(entry, default=str) + "\n")
        except OSError as e:
            logger.error(f"Error writing performance log {self.log_file}: {e}")

    def get_metrics(self) -> Dict[str, Dict]:
        """Snapshot of the aggregated metrics"""
        with self._lock:
            return copy.deepcopy(self.metrics)

    def reset_metrics(self):
        with self._lock:
            self.metrics = {operation: _empty_entry(operation) for operation in COUNTERS}

    def log_memory_usage(self) -> Optional[Dict]:
        """Append a psutil memory snapshot of this process to the performance log"""
        try:
            import psutil
        except ImportError:
            logger.warning("psutil not installed, cannot log memory usage")
            return None

        process = psutil.Process(os.getpid())
        memory_info = process.memory_info()
        snapshot = {
            "rss_mb": memory_info.rss / (1024 * 1024),
            "vms_mb": memory_info.vms / (1024 * 1024),
            "percent": process.memory_percent(),
        }
        with self._lock:
            self._write_log("memory_snapshot", 0.0, True, snapshot)
        return snapshot


performance_monitor = PerformanceMonitor()
