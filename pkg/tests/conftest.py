import numpy as np
import pytest


def brute_knn(points, query, k, exclude=None):
    """Full sort on (squared distance, index)."""
    d = [(float(np.sum((p - query) ** 2)), i) for i, p in enumerate(points) if i != exclude]
    return [i for _, i in sorted(d)[:k]]


def brute_kth(points, labels, i, k, same):
    cand = [
        (float(np.sum((points[j] - points[i]) ** 2)), j)
        for j in range(len(points))
        if j != i and ((labels[j] == labels[i]) == same)
    ]
    return sorted(cand)[k - 1][1]


def random_pd(rng, dim):
    M = rng.standard_normal((dim, dim))
    return M @ M.T + dim * 1e-2 * np.eye(dim)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def report(request):
    """Record one acceptance line, echo it in the terminal summary, then assert."""
    lines = request.config.stash.setdefault(_ACCEPTANCE_KEY, [])

    def _report(number, title, ok, detail):
        lines.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title} ({detail})")
        assert ok, f"criterion {number} failed: {detail}"

    return _report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
