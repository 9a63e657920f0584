import numpy as np
import pytest

from gugt.evaluation import extract_all
from gugt.skeleton_io import N_JOINTS, Label, Session
from gugt.synthgen import GaitProfile, generate_cohort, generate_session, separable_cohort_profiles


def make_session(n=10, fps=30, subject="S01", trial="T1", label=Label.UNLABELED, seed=0, tracked=None):
    rng = np.random.default_rng(seed)
    ts = np.round(np.arange(n) * 1000 / fps).astype(np.int64)
    pos = rng.uniform(-1, 1, (n, N_JOINTS, 3))
    pos[..., 2] = rng.uniform(1.0, 4.0, (n, N_JOINTS))
    return Session.from_arrays(subject, trial, ts, pos, tracked, label=label, fps_hint=float(fps))


@pytest.fixture(scope="session")
def default_trial():
    return generate_session(GaitProfile(), seed=0)


@pytest.fixture(scope="session")
def cohort():
    low, high = separable_cohort_profiles()
    return generate_cohort(low, high, 5, 7, trials=(3, 6), seed=0)


@pytest.fixture(scope="session")
def cohort_features(cohort):
    return extract_all(cohort.sessions)


@pytest.fixture(scope="session")
def small_cohort():
    low, high = separable_cohort_profiles()
    return generate_cohort(low, high, 2, 2, trials=(2, 3), seed=3)


# acceptance criteria verdicts, printed in the terminal summary
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
