"""Exponent algebra: frozen anchors and invariant sweeps."""
from __future__ import annotations

import math

import pytest
from hypothesis import given, strategies as st

from sublap.params import Parameters, critical_constant, derive_exponents


def test_anchor_s025_q1():
    d = derive_exponents(Parameters(s=0.25, q=1.0))
    assert d.a == 0.5
    assert d.k_q == 0.5
    assert d.beta_q == 0
    assert d.mu == 0.5


def test_anchor_s05_q1_integer_branch():
    d = derive_exponents(Parameters(s=0.5, q=1.0))
    assert d.k_q == 1.0
    assert d.beta_q == 0


def test_anchor_s04_q15_floor_branch():
    d = derive_exponents(Parameters(s=0.4, q=1.5))
    assert d.k_q == 1.6
    assert d.beta_q == 1
    assert abs(d.a - 0.2) < 1e-15


def test_mu_equivalent_form():
    for s, q in [(0.25, 1.0), (0.4, 1.5), (0.9, 1.9), (0.1, 1.2)]:
        d = derive_exponents(Parameters(s=s, q=q))
        assert d.mu == pytest.approx(d.k_q * (d.k_q + d.a), abs=1e-15)


def test_rejects_bad_parameters():
    with pytest.raises(ValueError):
        Parameters(s=0.0, q=1.0)
    with pytest.raises(ValueError):
        Parameters(s=1.0, q=1.0)
    with pytest.raises(ValueError):
        Parameters(s=0.5, q=2.0)
    with pytest.raises(ValueError):
        Parameters(s=0.5, q=0.9)
    with pytest.raises(ValueError):
        Parameters(s=0.5, q=1.0, lambda_plus=-1.0)
    with pytest.raises(ValueError):
        Parameters(s=0.5, q=1.0, n=0)


def test_critical_constant_anchors():
    assert critical_constant(1, 1.0, 0.25) == 1.5
    assert critical_constant(1, 2.0, 0.25) == 1.0


def test_critical_constant_root_at_k_q():
    # 2n - t(n-2s) - 2k(2-q) vanishes at k = k_q when t = 2.
    for s, q in [(0.25, 1.0), (0.4, 1.5), (0.7, 1.1)]:
        d = derive_exponents(Parameters(s=s, q=q))
        root = critical_constant(1, 2.0, s) - 2.0 * d.k_q * (2.0 - q)
        assert abs(root) < 1e-12


def test_critical_constant_rejects():
    with pytest.raises(ValueError):
        critical_constant(0, 1.0, 0.5)
    with pytest.raises(ValueError):
        critical_constant(1, 2.5, 0.5)
    with pytest.raises(ValueError):
        critical_constant(1, 1.0, 1.5)


@given(
    s=st.floats(min_value=0.01, max_value=0.99),
    q=st.floats(min_value=1.0, max_value=1.99),
)
def test_beta_q_bracket_property(s, q):
    d = derive_exponents(Parameters(s=s, q=q))
    assert isinstance(d.beta_q, int)
    assert d.beta_q < d.k_q <= d.beta_q + 1
    assert -1.0 < d.a < 1.0


@given(
    s=st.floats(min_value=0.05, max_value=0.95),
    q=st.floats(min_value=1.0, max_value=1.9),
    k=st.floats(min_value=0.05, max_value=25.0),
)
def test_weiss_sign_switch_property(s, q, k):
    # The t=2 constant minus 2k(2-q) is <= 0 exactly when k >= k_q.
    d = derive_exponents(Parameters(s=s, q=q))
    val = critical_constant(1, 2.0, s) - 2.0 * k * (2.0 - q)
    if k >= d.k_q + 1e-9:
        assert val <= 1e-9
    elif k <= d.k_q - 1e-9:
        assert val >= -1e-9


def test_integer_detection_tolerance():
    # s chosen so k_q = 1 up to float rounding takes the integer branch
    d = derive_exponents(Parameters(s=0.5, q=1.0 + 1e-13))
    assert d.beta_q == 0
    # clearly non-integer k_q keeps the floor branch
    d2 = derive_exponents(Parameters(s=0.55, q=1.0))
    assert d2.beta_q == 1
    assert math.floor(d2.k_q) == 1
