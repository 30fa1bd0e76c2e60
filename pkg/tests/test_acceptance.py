"""Acceptance suite: every numbered criterion at its stated tolerance.

Each test prints a PASS/FAIL line with the measured quantities.  Criterion 6
bounds the raw divergence monitor, whose e^{2 tau} coefficients amplify
double-precision integration error past the stated threshold; it is asserted
as stated and is expected to fail (the measured monitor scales linearly with
the integrator tolerance, so the bound would need state error below 4e-18).
The conformally rescaled monitor reported in its details shows the gauge
itself is preserved with four orders of margin.
"""

import pytest

from wavetails import acceptance


def _report(result):
    status = "PASS" if result.passed else "FAIL"
    print(f"[{status}] criterion {result.number}: {result.name} -- {result.details}")
    return result


def test_criterion_1_first_order_rate():
    r = _report(acceptance.criterion_1())
    assert r.passed, r.details


def test_criterion_2_second_order_rate_and_expansion():
    r = _report(acceptance.criterion_2())
    assert r.passed, r.details


def test_criterion_3_isomorphism_round_trip():
    r = _report(acceptance.criterion_3())
    assert r.passed, r.details


def test_criterion_4_mode_level_exactness():
    r = _report(acceptance.criterion_4())
    assert r.passed, r.details


def test_criterion_5_kasner_spectral_structure():
    r = _report(acceptance.criterion_5())
    assert r.passed, r.details


def test_criterion_6_gauge_preservation():
    # The raw divergence multiplies the state error by e^{2 tau} (~1.6e10 at
    # tau = 12); meeting the 1e-6 bound would need state error below 4e-18,
    # under double-precision resolution at the stated tol.  Asserted as
    # stated; the conformal-frame monitor in the details shows the gauge
    # itself is preserved.
    r = _report(acceptance.criterion_6())
    assert r.passed, r.details


def test_criterion_7_energy_blowup():
    r = _report(acceptance.criterion_7())
    assert r.passed, r.details


def test_criterion_8_faraday_rates():
    r = _report(acceptance.criterion_8())
    assert r.passed, r.details


def test_criterion_9_finite_difference_oracle():
    r = _report(acceptance.criterion_9())
    assert r.passed, r.details
