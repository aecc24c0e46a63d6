import numpy as np
import pytest
from scipy.integrate import quad

from icsmle.kernels import (BoundaryCoefficients, boundary_coeffs, integrated_kernel,
                            kernel_moments, scaled_kernel, triweight)


def test_triweight_values():
    assert triweight(0.0) == pytest.approx(35.0 / 32.0, abs=0)
    assert triweight(1.0) == 0.0
    assert triweight(-1.0) == 0.0
    # direct evaluation of (35/32)(1 - 0.25)^3
    assert triweight(0.5) == pytest.approx(0.46142578125, abs=1e-15)
    assert quad(triweight, -1, 1, epsabs=1e-13)[0] == pytest.approx(1.0, abs=1e-12)


def test_triweight_symmetry_support():
    x = np.linspace(-2, 2, 801)
    k = triweight(x)
    assert np.all(k >= 0)
    assert np.allclose(k, triweight(-x))
    assert np.all(k[np.abs(x) > 1] == 0)


def test_scaled_kernel():
    assert scaled_kernel(0.0, 0.25) == pytest.approx(4.375)
    assert scaled_kernel(0.25, 0.25) == 0.0
    x = np.linspace(-1.5, 1.5, 31)
    assert np.allclose(scaled_kernel(x, 1.0), triweight(x))
    for b in (0.05, 0.3, 2.0):
        mass = quad(lambda s: scaled_kernel(s, b), -b, b, epsabs=1e-12, limit=200)[0]
        assert mass == pytest.approx(1.0, abs=1e-10)
    with pytest.raises(ValueError):
        scaled_kernel(0.0, 0.0)
    with pytest.raises(ValueError):
        scaled_kernel(0.0, -1.0)


def test_integrated_kernel():
    b = 0.7
    assert integrated_kernel(b, b) == pytest.approx(1.0, abs=0)
    assert integrated_kernel(0.0, b) == pytest.approx(0.5, abs=0)
    assert integrated_kernel(-b, b) == 0.0
    x = np.linspace(-2, 2, 2001)
    ik = integrated_kernel(x, b)
    assert np.all(np.diff(ik) >= 0)
    assert ik[0] == 0.0 and ik[-1] == 1.0
    # antiderivative consistency with the density
    mid = quad(lambda s: scaled_kernel(s, b), -b, 0.31, epsabs=1e-12)[0]
    assert integrated_kernel(0.31, b) == pytest.approx(mid, abs=1e-10)
    with pytest.raises(ValueError):
        integrated_kernel(0.0, 0.0)


def test_kernel_moments_against_quadrature():
    m_sq, m_two = kernel_moments()
    oracle_sq = quad(lambda u: triweight(u) ** 2, -1, 1, epsabs=1e-13)[0]
    oracle_two = quad(lambda u: u * u * triweight(u), -1, 1, epsabs=1e-13)[0]
    assert m_sq == pytest.approx(oracle_sq, abs=1e-10)
    assert m_two == pytest.approx(oracle_two, abs=1e-10)
    assert m_sq == pytest.approx(350.0 / 429.0, abs=1e-15)
    assert m_two == pytest.approx(1.0 / 9.0, abs=1e-15)


def _oracle_coeffs(u):
    """Solve the truncated-moment system with quadrature moments."""
    m0 = quad(triweight, -1, u, epsabs=1e-13)[0]
    m1 = quad(lambda x: x * triweight(x), -1, u, epsabs=1e-13)[0]
    m2 = quad(lambda x: x * x * triweight(x), -1, u, epsabs=1e-13)[0]
    mat = np.array([[m0, m1], [m1, m2]])
    alpha, beta = np.linalg.solve(mat, [1.0, 0.0])
    return alpha, beta


def test_boundary_coeffs_endpoints():
    full = boundary_coeffs(1.0)
    assert full.alpha == pytest.approx(1.0, abs=1e-14)
    assert full.beta == pytest.approx(0.0, abs=1e-12)
    alpha0, beta0 = _oracle_coeffs(0.0)
    half = boundary_coeffs(0.0)
    assert half.alpha == pytest.approx(alpha0, abs=1e-8)
    assert half.beta == pytest.approx(beta0, abs=1e-8)
    # quadrature-oracle values for the half window
    assert half.alpha == pytest.approx(6.1146, abs=5e-4)
    assert half.beta == pytest.approx(15.0474, abs=5e-4)


def test_boundary_coeffs_residuals_grid():
    for u in np.linspace(0.0, 1.0, 101):
        c = boundary_coeffs(u)
        m0 = quad(triweight, -1, u, epsabs=1e-14)[0]
        m1 = quad(lambda x: x * triweight(x), -1, u, epsabs=1e-14)[0]
        m2 = quad(lambda x: x * x * triweight(x), -1, u, epsabs=1e-14)[0]
        assert abs(c.alpha * m0 + c.beta * m1 - 1.0) <= 1e-12
        assert abs(c.alpha * m1 + c.beta * m2) <= 1e-12


def test_boundary_coeffs_domain():
    with pytest.raises(ValueError):
        boundary_coeffs(-0.01)
    with pytest.raises(ValueError):
        boundary_coeffs(1.01)
    assert isinstance(boundary_coeffs(0.3), BoundaryCoefficients)


def test_boundary_kernel_mass_and_first_moment():
    # alpha(u) K + beta(u) x K on [-1, u] has mass 1 and first moment 0
    for u in (0.0, 0.25, 0.6, 1.0):
        c = boundary_coeffs(u)
        corrected = lambda x: (c.alpha + c.beta * x) * triweight(x)
        mass = quad(corrected, -1, u, epsabs=1e-13)[0]
        first = quad(lambda x: x * corrected(x), -1, u, epsabs=1e-13)[0]
        assert mass == pytest.approx(1.0, abs=1e-10)
        assert first == pytest.approx(0.0, abs=1e-10)


def test_boundary_coeffs_monotone_on_unit_interval():
    # stated but not quantified in the source material; verified numerically
    u = np.linspace(0.0, 1.0, 201)
    alpha = np.array([boundary_coeffs(x).alpha for x in u])
    beta = np.array([boundary_coeffs(x).beta for x in u])
    assert np.all(np.diff(alpha) <= 1e-12)
    assert np.all(np.diff(beta) <= 1e-12)
