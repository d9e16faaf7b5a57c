import numpy as np
import pytest

from rankopt import kernels


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=sorted(kernels.backends()))
def backend(request):
    """Each importable kernel backend module in turn."""
    return kernels.backends()[request.param]


def central_diff(fn, x, h=1e-6):
    """Central finite-difference gradient of a scalar function of a vector."""
    x = np.array(x, dtype=np.float64)
    g = np.zeros_like(x)
    for i in range(x.size):
        xp = x.copy()
        xm = x.copy()
        xp.flat[i] += h
        xm.flat[i] -= h
        g.flat[i] = (fn(xp) - fn(xm)) / (2 * h)
    return g


def random_batch(rng, n, pos_rate=0.4, min_gap=0.0):
    """Scores in (0, 1) with both classes present.

    With ``min_gap`` > 0, the extreme positive and negative are separated from
    their runners-up so argmin/argmax stay put under small perturbations.
    """
    while True:
        labels = (rng.random(n) < pos_rate).astype(np.int8)
        if 0 < labels.sum() < n:
            break
    scores = rng.uniform(0.05, 0.95, size=n)
    if min_gap > 0:
        pos = np.flatnonzero(labels == 1)
        neg = np.flatnonzero(labels == 0)
        lo = pos[np.argmin(scores[pos])]
        hi = neg[np.argmax(scores[neg])]
        others_pos = scores[pos][pos != lo]
        others_neg = scores[neg][neg != hi]
        if others_pos.size:
            scores[lo] = max(0.01, min(scores[lo], others_pos.min() - min_gap))
        if others_neg.size:
            scores[hi] = min(0.99, max(scores[hi], others_neg.max() + min_gap))
    return scores, labels


# acceptance reporting: tests tagged @pytest.mark.criterion(n, title) are
# folded into one PASS/FAIL line per criterion at the end of the run
_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion a test belongs to")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    entry = _CRITERIA.setdefault(number, {"title": title, "ok": True, "ran": False})
    if report.when == "call":
        entry["ran"] = True
    if report.failed or report.skipped:
        entry["ok"] = False


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        entry = _CRITERIA[number]
        status = "PASS" if entry["ok"] and entry["ran"] else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d} {status}  {entry['title']}")
