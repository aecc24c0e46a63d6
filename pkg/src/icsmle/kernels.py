"""Triweight kernel, its scalings and integrals, and boundary-correction coefficients.

The triweight kernel is fixed throughout: its moment constants enter the
asymptotic variance and bias formulas, and the boundary coefficients are the
solution of the truncated-moment system that restores unit mass and zero
first moment near the edges of the observation window.
"""

from dataclasses import dataclass

import numpy as np

# Constants of the triweight kernel (35/32)(1-x^2)^3 on [-1, 1]:
# integral of K^2, and second moment of K.  Exact rationals.
SQUARED_L2 = 350.0 / 429.0
SECOND_MOMENT = 1.0 / 9.0


def triweight(x):
    """Triweight kernel (35/32)(1-x^2)^3 on [-1, 1], zero outside."""
    x = np.asarray(x, dtype=float)
    out = np.where(np.abs(x) <= 1.0, (35.0 / 32.0) * (1.0 - x * x) ** 3, 0.0)
    return out if out.ndim else float(out)


def scaled_kernel(x, b):
    """Kernel rescaled to bandwidth b: (1/b) K(x/b)."""
    if b <= 0:
        raise ValueError(f"bandwidth must be positive, got {b}")
    x = np.asarray(x, dtype=float)
    out = triweight(x / b) / b
    return out if np.ndim(out) else float(out)


def integrated_kernel(x, b):
    """Integral of the scaled kernel from -infinity to x, in closed form."""
    if b <= 0:
        raise ValueError(f"bandwidth must be positive, got {b}")
    u = np.clip(np.asarray(x, dtype=float) / b, -1.0, 1.0)
    out = 0.5 + (35.0 / 32.0) * (u - u**3 + 0.6 * u**5 - u**7 / 7.0)
    return out if out.ndim else float(out)


def kernel_moments():
    """Return (integral of K^2, integral of u^2 K(u)) for the triweight."""
    return SQUARED_L2, SECOND_MOMENT


def _moment0(u):
    """m0(u) = integral of K over [-1, u]."""
    u = np.clip(u, -1.0, 1.0)
    return 0.5 + (35.0 / 32.0) * (u - u**3 + 0.6 * u**5 - u**7 / 7.0)


def _moment1(u):
    """m1(u) = integral of x K(x) over [-1, u]."""
    u = np.clip(u, -1.0, 1.0)
    return -(35.0 / 256.0) * (1.0 - u * u) ** 4


def _moment2(u):
    """m2(u) = integral of x^2 K(x) over [-1, u]."""
    u = np.clip(u, -1.0, 1.0)
    return (35.0 / 32.0) * (u**3 / 3.0 - 0.6 * u**5 + (3.0 / 7.0) * u**7 - u**9 / 9.0 + 16.0 / 315.0)


@dataclass(frozen=True)
class BoundaryCoefficients:
    """Coefficients of the boundary kernel alpha*K(u) + beta*u*K(u)."""

    u: float
    alpha: float
    beta: float


def _alpha_beta(u):
    """Vectorized boundary coefficients over an array of window fractions.

    Values u >= 1 give the interior kernel (alpha=1, beta=0); callers pass
    t/b which may exceed 1.
    """
    u = np.minimum(np.asarray(u, dtype=float), 1.0)
    m0, m1, m2 = _moment0(u), _moment1(u), _moment2(u)
    det = m0 * m2 - m1 * m1
    return m2 / det, -m1 / det


def boundary_coeffs(u):
    """Solve the 2x2 truncated-moment system for the boundary kernel at u.

    The coefficients satisfy alpha*m0(u) + beta*m1(u) = 1 and
    alpha*m1(u) + beta*m2(u) = 0 with m_k the truncated kernel moments.

    Parameters
    ----------
    u : float in [0, 1]
        Fraction of the kernel window that is visible.

    Returns
    -------
    BoundaryCoefficients
    """
    if not 0.0 <= u <= 1.0:
        raise ValueError(f"u must lie in [0, 1], got {u}")
    m0, m1, m2 = _moment0(u), _moment1(u), _moment2(u)
    det = m0 * m2 - m1 * m1
    if det <= 0:
        raise ArithmeticError(f"singular truncated-moment system at u={u}")
    return BoundaryCoefficients(u=float(u), alpha=float(m2 / det), beta=float(-m1 / det))
