import sys
import warnings
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from trajwarp.core import TrajectorySample  # noqa: E402
from trajwarp.estimators import TemplateActionClassifier  # noqa: E402
from trajwarp.synthetic import SyntheticSpec, generate_synthetic  # noqa: E402


def make_sample(signals, label=1, subject=1, index=0, n_joints=None):
    return TrajectorySample([np.asarray(x, float) for x in signals], class_label=label,
                            subject_id=subject, sample_index=index, n_joints=n_joints)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def small_dataset():
    spec = SyntheticSpec(n_classes=3, n_subjects=3, reps=3, base_frames=40)
    return generate_synthetic(spec, seed=7)


@pytest.fixture(scope="session")
def small_model(small_dataset):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return TemplateActionClassifier(n_trees=25, autotune=False).fit(small_dataset)


# --- acceptance summary: one line per criterion --------------------------------

_ACCEPTANCE = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    n = marker.args[0]
    if hasattr(item, "callspec"):
        n = (n, item.callspec.id)
    detail = dict(item.user_properties).get("detail", "")
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        if report.skipped:
            status = "SKIP" if not hasattr(report, "wasxfail") else "FAIL (non-gating)"
            reason = report.longrepr[-1] if isinstance(report.longrepr, tuple) else ""
            detail = detail or str(reason).removeprefix("Skipped: ")
        else:
            status = "PASS" if report.passed else "FAIL"
        _ACCEPTANCE[n] = (status, marker.kwargs.get("title", item.name), detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_ACCEPTANCE, key=lambda k: k if isinstance(k, tuple) else (k, "")):
        status, title, detail = _ACCEPTANCE[key]
        n = key[0] if isinstance(key, tuple) else key
        line = f"criterion {n:>2} {status:<4} {title}"
        terminalreporter.write_line(line + (f": {detail}" if detail else ""))
