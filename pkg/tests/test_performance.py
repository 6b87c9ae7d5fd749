import json
from concurrent.futures import ThreadPoolExecutor

import pytest

from ciel_toolkit.core.decide import sat
from ciel_toolkit.core.formula import parse_world
from ciel_toolkit.core.generators import make_rng, random_world_formula
from ciel_toolkit.performance import PerformanceMonitor, performance_monitor


def test_timer_updates_counters():
    monitor = PerformanceMonitor()
    timer = monitor.start_timer("closure")
    elapsed = monitor.stop_timer(timer, result_metadata={"sigma_size": 12})
    assert elapsed >= 0
    metrics = monitor.get_metrics()["closure"]
    assert metrics["calls"] == 1
    assert metrics["total_formulas"] == 12


def test_overlapping_timers_of_one_operation():
    monitor = PerformanceMonitor()
    first = monitor.start_timer("closure")
    second = monitor.start_timer("closure")
    monitor.stop_timer(first, result_metadata={"sigma_size": 3})
    monitor.stop_timer(second, result_metadata={"sigma_size": 4})
    assert monitor.get_metrics()["closure"]["calls"] == 2
    assert monitor.get_metrics()["closure"]["total_formulas"] == 7


def test_track_records_failures():
    monitor = PerformanceMonitor()
    with pytest.raises(RuntimeError):
        with monitor.track("elimination") as result:
            result["rounds"] = 2
            raise RuntimeError("boom")
    metrics = monitor.get_metrics()["elimination"]
    assert (metrics["calls"], metrics["failures"], metrics["total_rounds"]) == (1, 1, 2)


def test_json_lines_log(tmp_path):
    path = tmp_path / "logs" / "performance.jsonl"
    monitor = PerformanceMonitor()
    monitor.configure(str(path))
    with monitor.track("model_check", formula="p") as result:
        result["worlds"] = 3
    entries = [json.loads(line) for line in path.read_text().splitlines()]
    assert entries[0]["operation"] == "model_check"
    assert entries[0]["metadata"] == {"formula": "p", "worlds": 3}


def test_decision_procedure_is_timed():
    sat(parse_world("C[q] p"))
    metrics = performance_monitor.get_metrics()
    assert metrics["closure"]["calls"] == 1
    assert metrics["type_enumeration"]["total_types"] == 5
    assert metrics["elimination"]["calls"] == 1


def test_concurrent_decisions():
    rng = make_rng(99)
    formulas = [random_world_formula(rng, agent_atoms=("r",)) for _ in range(200)]
    expected = [sat(f, verify=False).satisfiable for f in formulas]
    performance_monitor.reset_metrics()

    with ThreadPoolExecutor(max_workers=16) as executor:
        verdicts = list(executor.map(lambda f: sat(f, verify=False).satisfiable, formulas))

    assert verdicts == expected
    metrics = performance_monitor.get_metrics()
    assert metrics["closure"]["calls"] == len(formulas)
    assert metrics["elimination"]["calls"] == len(formulas)


def test_metrics_are_a_snapshot():
    monitor = PerformanceMonitor()
    snapshot = monitor.get_metrics()
    with monitor.track("puzzle_scan", worlds_scanned=7):
        pass
    assert snapshot["puzzle_scan"]["calls"] == 0
    monitor.reset_metrics()
    assert monitor.get_metrics()["puzzle_scan"]["total_worlds_scanned"] == 0


def test_memory_snapshot(tmp_path):
    monitor = PerformanceMonitor()
    monitor.configure(str(tmp_path / "performance.jsonl"))
    snapshot = monitor.log_memory_usage()
    assert snapshot["rss_mb"] > 0
