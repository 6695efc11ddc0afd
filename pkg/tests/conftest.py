import time

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def dark_scene(rng, h=48, w=64, scale=0.15):
    """Smooth dark color scene with a brighter blob and mild noise."""
    yy, xx = np.mgrid[0:h, 0:w]
    blob = np.exp(-(((yy - h / 3) ** 2) + ((xx - 2 * w / 3) ** 2)) / (2 * (w / 6) ** 2))
    tint = rng.uniform(0.6, 1.0, 3)
    base = (0.2 + 0.8 * blob)[:, :, None] * tint
    noise = rng.normal(0.0, 0.01, (h, w, 3))
    return np.clip(scale * base + noise, 0.0, 1.0)


SUITE_BUDGET_S = 120.0


def pytest_sessionstart(session):
    session.config._irle_start = time.perf_counter()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    elapsed = time.perf_counter() - config._irle_start
    ok = elapsed < SUITE_BUDGET_S
    terminalreporter.write_line(
        f"[{'PASS' if ok else 'FAIL'}] criterion 11: full suite runtime ({elapsed:.1f} s, budget {SUITE_BUDGET_S:.0f} s)"
    )
