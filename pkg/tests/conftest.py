import numpy as np
import pytest

from skelhash.skeleton import ActionSequence


def pytest_runtest_logreport(report):
    # one visible pass/fail line per acceptance criterion
    if report.when == "call" and "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        status = "PASS" if report.passed else ("SKIP" if report.skipped else "FAIL")
        print(f"\n[ACCEPTANCE] {name}: {status}")


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def random_sequence(rng, frames=6, label=None, subject=None, seq_id="seq"):
    joints = rng.normal(0.0, 0.5, size=(frames, 15, 3))
    return ActionSequence(joints, label=label, subject=subject, sequence_id=seq_id)
