import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def random_convex_quad(rng, center=(0.0, 0.0), radius=(5.0, 50.0)):
    """Convex quad with positive signed area (y-down), TL first."""
    while True:
        angles = np.sort(rng.uniform(0, 2 * np.pi, 4))
        gaps = np.diff(np.append(angles, angles[0] + 2 * np.pi))
        if gaps.max() >= np.pi * 0.95 or gaps.min() < 0.3:
            continue
        r = rng.uniform(*radius, 4)
        pts = np.column_stack([r * np.cos(angles), r * np.sin(angles)]) + np.asarray(center)
        e = np.roll(pts, -1, axis=0) - pts
        turns = e[:, 0] * np.roll(e, -1, axis=0)[:, 1] - e[:, 1] * np.roll(e, -1, axis=0)[:, 0]
        if np.all(turns > 0):
            return pts


def random_parallelogram(rng, center=(0.0, 0.0), scale=(10.0, 60.0)):
    c = np.asarray(center, dtype=float)
    u = rng.uniform(*scale) * np.array([np.cos(t := rng.uniform(-0.6, 0.6)), np.sin(t)])
    s = rng.uniform(*scale)
    shear = rng.uniform(-0.5, 0.5)
    v = s * np.array([-np.sin(t) + shear * np.cos(t), np.cos(t) + shear * np.sin(t)])
    return np.array([c - u / 2 - v / 2, c + u / 2 - v / 2, c + u / 2 + v / 2, c - u / 2 + v / 2])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


class ScriptedRng:
    """Stand-in generator returning a fixed sequence from ``random()``."""

    def __init__(self, values):
        self.values = list(values)
        self.calls = 0

    def random(self):
        v = self.values[self.calls % len(self.values)]
        self.calls += 1
        return v


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
