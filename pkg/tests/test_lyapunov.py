import json
import math

import numpy as np
import pytest

from conftest import random_coefficient, random_sign_changing_weight
from plyap.errors import DomainError, UnsupportedCoefficientError
from plyap.lyapunov import (
    NONEXISTENCE,
    BoundReport,
    all_bounds,
    bound_classical,
    bound_higher_order,
    bound_lyapi,
    bound_lyapu,
    bounds_harris_kong,
    das_vatsala_constant,
    das_vatsala_report,
    nodal_domain_reports,
    taylor_embedding_constant,
)
from plyap.pmath import pi_p
from plyap.shooting import ProblemSpec, eigenvalue, eigenvalues
from plyap.weights import PiecewiseWeight

STEP_A = PiecewiseWeight.step([1.0, 4.0], [0.5, 1.0])
ONE = PiecewiseWeight.constant(1.0, 1.0)


def test_report_tolerance_and_note():
    assert BoundReport("thm_lyapi", 1.0 + 5e-13, 1.0).satisfied
    bad = BoundReport("thm_lyapi", 1.0 + 1e-9, 1.0)
    assert not bad.satisfied and bad.note == NONEXISTENCE
    assert BoundReport("classical", 2.0, 4.0).slack == 2.0
    with pytest.raises(DomainError):
        BoundReport("made_up", 0.0, 1.0)


def test_lyapi_examples():
    rep = bound_lyapi(ProblemSpec(2.0, math.pi))
    assert rep.lhs == pytest.approx(1 / (2 * math.pi))
    assert rep.rhs == pytest.approx(math.pi)
    assert rep.satisfied

    rep = bound_lyapi(ProblemSpec(2.0, math.pi, rho=0.01))
    assert rep.rhs == pytest.approx(0.01 * math.pi)
    assert not rep.satisfied and rep.note == NONEXISTENCE
    # and indeed 1 is not an eigenvalue of that weight
    assert eigenvalue(ProblemSpec(2.0, math.pi, rho=0.01), 1).lam == pytest.approx(100.0, rel=1e-8)

    rep = bound_lyapi(ProblemSpec(3.0, 1.0, a=STEP_A))
    assert rep.lhs == pytest.approx(0.75**-2 / 3, rel=1e-12)
    assert rep.lhs == pytest.approx(0.5926, abs=1e-4)


def test_lyapu_examples():
    spec = ProblemSpec(2.0, math.pi)
    rep = bound_lyapu(spec, 1, 1.0)
    assert rep.lhs == pytest.approx(1 / (2 * math.pi))
    assert rep.slack == pytest.approx(math.pi - 1 / (2 * math.pi))
    assert rep.slack == pytest.approx(2.98, abs=0.01)
    rep = bound_lyapu(spec, 4, 16.0)
    assert rep.lhs == pytest.approx(4 / (2 * math.pi))
    assert rep.rhs == pytest.approx(16 * math.pi)


def test_oscillation_beats_positive_mass():
    sine = PiecewiseWeight.sinusoid(1.0, 2 * math.pi, 0.0, 0.0, 1.0)
    spec = ProblemSpec(2.0, 1.0, rho=sine)
    lam = eigenvalue(spec, 1).lam
    u, c = bound_lyapu(spec, 1, lam), bound_classical(spec, 1, lam)
    assert u.rhs == pytest.approx(c.rhs, rel=1e-10)
    assert u.rhs == pytest.approx(lam / math.pi, rel=1e-10)

    spec = ProblemSpec(2.0, 1.0, rho=sine.shift(0.05))
    lam = eigenvalue(spec, 1).lam
    assert bound_lyapu(spec, 1, lam).rhs < bound_classical(spec, 1, lam).rhs


def test_classical_examples():
    spec = ProblemSpec(2.0, math.pi)
    rep = bound_classical(spec, 1, 1.0)
    assert (rep.lhs, rep.rhs) == pytest.approx((4 / math.pi, math.pi))
    rep = bound_classical(spec, 2, 4.0)
    assert (rep.lhs, rep.rhs) == pytest.approx((16 / math.pi, 4 * math.pi))
    rep = bound_classical(ProblemSpec(3.0, 1.0), 1, pi_p(3.0) ** 3)
    assert rep.lhs == pytest.approx(8.0)
    assert rep.rhs == pytest.approx(28.29, abs=0.01)
    assert rep.satisfied


def test_classical_negative_ladder_uses_negative_mass():
    spec = ProblemSpec(2.0, 1.0, rho=PiecewiseWeight.step([1.0, -3.0], [0.5, 1.0]))
    pair = eigenvalue(spec, 1, "-")
    rep = bound_classical(spec, 1, pair.lam)
    assert rep.rhs == pytest.approx(abs(pair.lam) * 1.5)
    assert rep.satisfied


def test_harris_kong_examples():
    left, right = bounds_harris_kong(ProblemSpec(2.0, 2.0))
    assert left.rhs == pytest.approx(4.0) and left.satisfied
    assert right.rhs == pytest.approx(4.0)

    sine = PiecewiseWeight.sinusoid(1.0, 2 * math.pi, 0.0, 0.0, 1.0)
    left, right = bounds_harris_kong(ProblemSpec(2.0, 1.0, rho=sine))
    assert left.rhs == pytest.approx(1 / math.pi, rel=1e-12)
    assert not left.satisfied and left.note == NONEXISTENCE
    # from the right the primitive of sin(2 pi x) is never positive
    assert right.rhs == pytest.approx(0.0, abs=1e-14)

    left, _ = bounds_harris_kong(ProblemSpec(2.0, 0.5))
    assert left.rhs == pytest.approx(0.25) and not left.satisfied


def test_unit_coefficient_required():
    spec = ProblemSpec(2.0, 1.0, a=STEP_A)
    with pytest.raises(UnsupportedCoefficientError):
        bounds_harris_kong(spec)
    with pytest.raises(UnsupportedCoefficientError):
        bound_classical(spec, 1, 10.0)


def test_higher_order_examples():
    rep = bound_higher_order(2, 2.0, ONE, 1.0, PiecewiseWeight.constant(500.564, 1.0))
    assert rep.name == "thm_lyapi2"
    assert rep.lhs == 0.5
    assert rep.rhs == pytest.approx(500.564)
    assert rep.satisfied
    rep = bound_higher_order(2, 2.0, ONE, 1.0, PiecewiseWeight.constant(0.4, 1.0))
    assert rep.lhs == 0.5 and rep.rhs == pytest.approx(0.4) and not rep.satisfied
    assert bound_higher_order(3, 2.0, ONE, 1.0, ONE).lhs == pytest.approx(1.0)
    assert bound_higher_order(2, 3.0, STEP_A, 1.0, ONE).name == "thm_lyapimp"


def test_higher_order_signed_sup():
    # the signed sup of the prefix integral ignores the negative excursion
    rho = PiecewiseWeight.step([-5.0, 1.0], [0.5, 1.0])
    rep = bound_higher_order(2, 2.0, ONE, 1.0, rho)
    assert rep.rhs == pytest.approx(0.0, abs=1e-14)


@pytest.mark.parametrize("m", [0, 1])
def test_higher_order_needs_m_two(m):
    with pytest.raises(DomainError, match="m < 2"):
        bound_higher_order(m, 2.0, ONE, 1.0, ONE)
    with pytest.raises(DomainError):
        das_vatsala_constant(m, 1.0)


def test_das_vatsala_values():
    assert das_vatsala_constant(2, 1.0) == 192.0
    assert das_vatsala_constant(2, 2.0) == 24.0
    assert das_vatsala_constant(3, 1.0) == 5120.0
    rep = das_vatsala_report(2, 1.0, PiecewiseWeight.constant(500.0, 1.0))
    assert rep.name == "das_vatsala_reference" and rep.note.startswith("reference only")


def test_taylor_constant_values():
    assert taylor_embedding_constant(1, 2.0, ONE, 1.0) == pytest.approx(1.0)
    assert taylor_embedding_constant(2, 2.0, PiecewiseWeight.constant(1.0, 2.0), 2.0) == pytest.approx(2 * math.sqrt(2))
    assert taylor_embedding_constant(1, 3.0, STEP_A, 1.0) == pytest.approx(0.75 ** (2 / 3))
    assert taylor_embedding_constant(1, 3.0, STEP_A, 1.0) == pytest.approx(0.8255, abs=1e-4)


def test_taylor_constant_on_monomials():
    # u = x^m / m! has u^(m) = 1, and the worst case for m = 1 is attained
    for m in (1, 2, 3):
        C = taylor_embedding_constant(m, 2.0, ONE, 1.0)
        assert 1.0 / math.factorial(m) <= C * (1.0 + 1e-12)
    assert taylor_embedding_constant(1, 2.0, ONE, 1.0) == 1.0


def test_lyapu_and_classical_hold_on_random_weights(rng):
    for _ in range(8):
        p = float(rng.choice([2.0, 3.0]))
        spec = ProblemSpec(p, 1.0, rho=random_sign_changing_weight(rng))
        for pair in eigenvalues(spec, (1, 2, 3)):
            assert bound_lyapu(spec, pair.k, pair.lam).satisfied
            assert bound_classical(spec, pair.k, pair.lam).satisfied


def test_nodal_domains_constant_weight():
    # equal nodal domains, so every local lhs equals the global one
    spec = ProblemSpec(2.0, math.pi)
    for k in (1, 2, 3, 4):
        pair = eigenvalue(spec, k)
        reports = nodal_domain_reports(spec, pair)
        assert len(reports) == k
        target = bound_lyapu(spec, k, pair.lam).lhs
        for rep in reports:
            assert rep.satisfied
            assert rep.lhs == pytest.approx(target, rel=1e-7)


def test_nodal_domains_dominate_global_bound(rng):
    for _ in range(4):
        p = float(rng.choice([2.0, 3.0]))
        spec = ProblemSpec(p, 1.0, a=random_coefficient(rng), rho=random_sign_changing_weight(rng))
        for sign in "+-":
            pair = eigenvalue(spec, 3, sign)
            reports = nodal_domain_reports(spec, pair)
            assert all(r.satisfied for r in reports)
            assert max(r.lhs for r in reports) >= bound_lyapu(spec, 3, pair.lam).lhs * (1 - 1e-9)


def test_all_bounds_and_json():
    spec = ProblemSpec(2.0, 1.0, rho=PiecewiseWeight.step([2.0, -1.0], [0.5, 1.0]))
    reports = all_bounds(spec, eigenvalues(spec, (1, 2)))
    names = [r.name for r in reports]
    assert names.count("thm_lyapu") == 2 and names.count("classical") == 2
    assert "thm_lyapi" in names and "harris_kong_left" in names
    for rep in reports:
        data = json.loads(rep.to_json())
        assert data["name"] == rep.name
        assert np.isfinite(data["lhs"])
    assert json.loads(reports[0].to_json())["inputs"]["rho"]["segments"][1]["params"] == {"value": -1.0}
