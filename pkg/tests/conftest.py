"""Shared fixtures and the acceptance-criteria summary hook."""
import numpy as np
import pytest

from edgemarket import SystemConfig
from edgemarket.radio import Topology


@pytest.fixture
def cfg():
    """Default configuration, risk neutral and exact allocation."""
    return SystemConfig(auction_mode="exact", risk_weight=0.0)


@pytest.fixture
def small_cfg():
    """A scaled-down geometry with deadlines the radio model can meet."""
    return SystemConfig(
        num_ue=6, num_es=2, num_tasks=12,
        region_side=800.0,
        ue_intensity=12.0 / 800.0**2,
        es_intensity=2.0 / 800.0**2,
        deadline_min=1.0, deadline_max=6.0,
        es_capacity=8, auction_mode="exact", risk_weight=0.0)


def make_topology(gains, subchannels=None, coverage_radius=500.0,
                  spacing=100.0):
    """Hand-built topology from an (n_ue, n_es) gain matrix.

    Entities are laid out on a line well inside every coverage disk, so
    each device is covered by (and served by) every server; tests that
    need partial coverage build the tuple fields directly instead.
    """
    gains = np.asarray(gains, dtype=float)
    n_ue, n_es = gains.shape
    ue_pos = np.array([[spacing * i, 0.0] for i in range(n_ue)])
    es_pos = np.array([[spacing * j, 10.0] for j in range(n_es)])
    if subchannels is None:
        subchannels = np.ones(n_ue, dtype=np.int64)
    else:
        subchannels = np.asarray(subchannels, dtype=np.int64)
    coverage = tuple(tuple(range(n_ue)) for _ in range(n_es))
    serving = tuple(0 for _ in range(n_ue))
    return Topology(
        ue_positions=ue_pos, es_positions=es_pos, channel_gain=gains,
        subchannels=subchannels, coverage=coverage, serving=serving)


# ---------------------------------------------------------------------------
# acceptance criteria reporting: each criterion test records exactly one
# PASS/FAIL line, printed in a dedicated terminal section at the end.

_criterion_lines = []


def _record_line(line: str) -> None:
    _criterion_lines.append(line)


@pytest.fixture
def record_criterion():
    """Callable that adds one line to the end-of-run criteria section."""
    return _record_line


def pytest_terminal_summary(terminalreporter):
    if _criterion_lines:
        terminalreporter.section("acceptance criteria")
        for line in _criterion_lines:
            terminalreporter.write_line(line)
