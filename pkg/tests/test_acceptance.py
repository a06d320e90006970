"""End-to-end acceptance gate.

One test per named check in the verify registry, run in registry order
with a shared cache so expensive solves are reused.  Each test prints a
single PASS/FAIL line (run pytest with -s or look at the failure detail)
and asserts the measured result.
"""
from __future__ import annotations

import pytest

from sublap.verify import CHECK_NAMES, run_check

CACHE: dict = {}


@pytest.mark.parametrize("name", CHECK_NAMES)
def test_acceptance(name):
    res = run_check(name, CACHE)
    status = "PASS" if res.passed else "FAIL"
    print(f"{status} {res.name}: {res.detail}")
    assert res.passed, f"{res.name}: {res.detail}"
