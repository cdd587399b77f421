"""Acceptance criteria at full size and stated tolerances.

The whole suite runs once per session (groups in order, then every group
again with another worker count); each criterion is one test and one
PASS/FAIL line in the terminal summary.
"""

import os

import pytest

from cubiclines.harness import acceptance_suite

pytestmark = pytest.mark.slow

# criterion number -> (group, title, wall-time limit in seconds)
CRITERIA = {
    1: ("mitm-vs-bruteforce", "hash join equals brute force", 120),
    2: ("closed-form", "closed-form counts", 60),
    3: ("hua", "single-equation count and growth", 1800),
    4: ("pv", "mean values", 300),
    5: ("orthogonality", "grid orthogonality", 60),
    6: ("complete-sum", "complete-sum laws", 300),
    7: ("local-density", "local density identity", 600),
    8: ("singular-series", "Euler factors positive and stable", 3600),
    9: ("singular-integral", "singular integral positive", 1800),
    10: ("arc-toolkit", "arc toolkit", 600),
}
DETERMINISM_LIMIT = 300

SUMMARY: dict[int, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def suite():
    workers = int(os.environ.get("CUBICLINES_WORKERS", "1"))
    return acceptance_suite("full", seed=0, workers=workers, determinism=True)


def _record(n, title, failures, timing_ok, seconds):
    ok = not failures and timing_ok
    why = "; ".join(f"{c.name} lhs={c.lhs!r} tol={c.tolerance}" for c in failures)
    if not timing_ok:
        why = (why + "; " if why else "") + "over time budget"
    SUMMARY[n] = (ok, f"{title} ({seconds:.1f}s){': ' + why if why else ''}")
    return ok, why


@pytest.mark.parametrize("n", sorted(CRITERIA))
def test_criterion(suite, n):
    group, title, limit = CRITERIA[n]
    checks = [c for c in suite.checks if c.name.split(":")[0] == group]
    assert checks, f"no checks recorded for {group}"
    seconds = suite.timing.get(group, float("inf"))
    ok, why = _record(n, title, [c for c in checks if not c.passed], seconds < limit, seconds)
    assert ok, why


def test_criterion_11_determinism(suite):
    checks = [c for c in suite.checks if c.name.startswith("determinism:")]
    seconds = suite.timing.get("determinism", float("inf"))
    ok, why = _record(11, "rerun with another worker count is byte-identical", [c for c in checks if not c.passed],
                      seconds < DETERMINISM_LIMIT, seconds)
    assert len(checks) == len(CRITERIA)
    assert ok, why
