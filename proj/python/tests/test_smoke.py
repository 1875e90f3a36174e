import math

import numpy as np
import pytest

import fbme


def test_covariance_and_sampling():
    assert fbme.fbm_covariance(0.3, 0.7, 0.5) == pytest.approx(0.3)
    x = fbme.sample_fbm(64, 0.4, 2, seed=3)
    assert x.shape == (65, 2)
    assert np.all(x[0] == 0.0)
    assert np.array_equal(x, fbme.sample_fbm(64, 0.4, 2, seed=3))


def test_chen_residual_small():
    x = fbme.sample_fbm(128, 0.35, 3, seed=11)
    assert fbme.chen_residual(x) < 1e-12


def test_trees():
    assert [len(fbme.tree_level(N)) for N in range(1, 6)] == [1, 2, 5, 15, 52]
    assert fbme.branch_stats([1, 2, 1, 3]) == ([2, 2, 2], 3)
    assert fbme.tree_level(2)[0] == {"labels": [1, 1], "ell": [2, 1, 1], "alpha": 3, "coeff": "1/2"}
    with pytest.raises(ValueError, match="position 2"):
        fbme.branch_stats([1, 3])


def test_run_and_malliavin_identity():
    s = fbme.Scheme(H=0.4, n=64, y0=[0.1, -0.2])
    x = s.noise(5)
    y = s.run(x)
    assert y.shape == (65, 2)
    assert np.allclose(y[0], [0.1, -0.2])
    h = fbme.cameron_martin_direction(64, 0.5, 0.4, [1.0, 0.5])
    z = s.directional_derivative(x, h, 2)
    assert np.allclose(z[0], y)
    for L in (1, 2):
        fd = s.fd_oracle(x, h, L, 1e-4)
        assert np.max(np.abs(z[L] - fd)) / (1 + np.max(np.abs(z[L]))) < 1e-5


def test_xi_first_level_is_linear_in_b():
    s = fbme.Scheme(H=0.4, n=32, y0=[0.1, -0.2])
    x, b = s.noise(1), s.noise(fbme.companion_seed(1))
    one = s.xi(x, b, 1)[1]
    two = s.xi(x, 2 * b, 1)[1]
    assert np.allclose(two, 2 * one, atol=1e-12)


def test_ledger_and_bound_check():
    s = fbme.Scheme(H=0.45, n=128, p=2.25, scale=0.01, y0=[0.1, -0.2])
    led = s.ledger(2)
    assert led["alpha"] > 0 and len(led["K2"]) == 3
    assert fbme.Kmu(2.0) == pytest.approx(4 * math.pi**2 / 6, rel=1e-9)
    r = s.bound_check(s.noise(7), s.noise(fbme.companion_seed(7)), 1)
    assert r["defect_ok"] and r["lhs"] > 0


def test_errors():
    with pytest.raises(ValueError):
        fbme.Scheme(H=0.7)
    s = fbme.Scheme(n=16)
    with pytest.raises(ValueError):
        s.run(np.zeros((9, 2)))
    assert issubclass(fbme.CapabilityError, ValueError)


def test_convergence_small():
    s = fbme.Scheme(H=0.45, n=512, y0=[0.1, -0.2])
    r = s.convergence([64, 128, 256, 512], list(range(20)))
    assert len(r["rms_consecutive"]) == 3 and len(r["rms_vs_finest"]) == 4
    assert 0.0 < r["rate"] < 1.0
