import math

import numpy as np
import pytest

import kinetic_degiorgi as kdg


def test_exponents():
    e = kdg.degiorgi_exponents(2.5)
    assert e["beta1"] == pytest.approx(5 / 3, abs=1e-12)
    assert e["beta2"] == pytest.approx(1 / 12, abs=1e-12)
    assert kdg.p_critical(1, 0.5) == pytest.approx(8 / 3, abs=1e-12)
    assert kdg.m_threshold(0.5) == pytest.approx(5.0, abs=1e-12)


def test_theory_constants_are_log_space():
    c = kdg.theory_constants()
    assert c["n"] == pytest.approx(4.0)
    assert c["zeta_log"] < 0
    assert math.isfinite(c["theta_log"])


def test_kernel_value():
    assert kdg.fractional_kernel(1, 0.5, [0.0], [2.0]) == pytest.approx(0.25, rel=1e-15)


def test_cylinder():
    z = kdg.KineticPoint(0.0, [0.0], [0.0])
    q = kdg.KineticCylinder(z, 0.5, 0.5)
    assert q.contains(kdg.KineticPoint(-0.1, [0.0], [0.1]))
    assert not q.contains(kdg.KineticPoint(0.1, [0.0], [0.0]))
    assert q.volume() == pytest.approx(kdg.cylinder_volume(1, 0.5, 0.5))


def test_symbol_at_zero_phi():
    for xi in (0.3, 1.0, 2.5):
        assert kdg.symbol(0.5, [0.0], [xi]) == pytest.approx(math.exp(-abs(xi)), rel=1e-10)


def test_fundamental_solution_mass():
    J = kdg.fundamental_solution(0.5, 1.0, 8.0, 12.0, 128)
    assert J["J"].shape == (128, 128)
    assert J["mass"] == pytest.approx(1.0, abs=1e-3)


def test_solver_conserves_mass():
    n = 32
    x = (np.arange(n) + 0.5) * 2.0 / n - 1.0
    v = (np.arange(n) + 0.5) * 8.0 / n - 4.0
    f0 = np.exp(-(x[:, None] ** 2 + v[None, :] ** 2) / 0.5)
    out = kdg.solve(f0.ravel(), 1.0, 4.0, 1, 0.5, [0.1, 0.2])
    assert len(out) == 2
    assert out[-1].sum() == pytest.approx(f0.sum(), rel=1e-6)


def test_barrier_ordering():
    for vv in np.linspace(-0.4, 0.4, 41):
        p = [kdg.barrier(0.5, 0.1, 0.1, [0.0], [vv], i) for i in range(3)]
        assert p[0] <= p[1] <= p[2]


def test_validation_error_maps_to_value_error():
    with pytest.raises(ValueError):
        kdg.degiorgi_exponents(1.0)


def test_vitali_audit():
    pts = [(-0.1 * k, [0.01 * k], [0.02 * k]) for k in range(10)]
    res = kdg.vitali_cover(pts, 1, 0.5, 5.0, 0.5, kdg.covering_alpha(0.3, 2), 1e-6)
    assert res["disjoint"] and res["bookkeeping"]


def test_canonical_json_sorted():
    assert kdg.canonical_json('{"b": 1, "a": 2.5}') == '{\n  "a": 2.5,\n  "b": 1\n}\n'
