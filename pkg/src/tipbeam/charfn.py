"""Closed-form characteristic function of the beam eigenvalue problem.

Separating variables turns the eigenproblem into a 4x4 homogeneous linear
system for the coefficients of the exponential interior solutions e^{t_i x}.
Eigenvalues are the zeros of f(lambda) = -det M(lambda) / (16 b), where M
collects the clamped-end and tip-feedback conditions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BranchRootNearZero, NearBranchPoint, ZeroDenominator, ZeroLambda
from .model import BeamParams, require_unit_speed


@dataclass(frozen=True)
class BranchRoots:
    """The four interior exponents; t2 = -t1 and t4 = -t3 exactly."""

    t1: complex
    t2: complex
    t3: complex
    t4: complex


@dataclass(frozen=True)
class CharMatrix:
    """Boundary collocation matrix together with its evaluation point."""

    matrix: np.ndarray
    lam: complex
    params: BeamParams


def _check_nonzero(lam: np.ndarray) -> None:
    if np.any(lam == 0):
        raise ZeroLambda("branch roots are defined for lambda != 0")


def _roots(lam: np.ndarray, b: float) -> tuple[np.ndarray, np.ndarray]:
    """t1, t3 with principal square roots composed factor by factor."""
    sb = np.sqrt(b)
    t1 = np.sqrt(lam) * np.sqrt(1j * sb + lam)
    t3 = np.sqrt(lam) * np.sqrt(-1j * sb + lam)
    return t1, t3


def branch_roots(lam: complex, b: float) -> BranchRoots:
    """Exponents of the four interior solutions e^{t x} at frequency lambda.

    t1 = sqrt(lambda) * sqrt(i sqrt(b) + lambda) and t3 its mirror across the
    real axis of the second factor; each square root is the principal branch,
    applied to the two factors separately.
    """
    lam = np.asarray(lam, dtype=complex)
    _check_nonzero(lam)
    t1, t3 = _roots(lam, b)
    return BranchRoots(complex(t1), complex(-t1), complex(t3), complex(-t3))


def mode_couplings(lam: complex, roots: BranchRoots):
    """Shear amplitudes d_i = (lambda^2 - t_i^2)/t_i for each exponent.

    Evaluated through lambda^2 - t1^2 = -(t1^2 - t3^2)/2 (= -i lambda
    sqrt(b), and +i for t3), avoiding the direct difference with lambda^2
    that cancels badly at large |lambda|.
    """
    t1, t3 = roots.t1, roots.t3
    if min(abs(t1), abs(t3)) < 1e-12:
        raise BranchRootNearZero(f"branch root too small at lambda={lam}")
    ilsb = (t1 * t1 - t3 * t3) / 2.0   # i lambda sqrt(b)
    d1 = -ilsb / t1
    d3 = ilsb / t3
    return d1, -d1, d3, -d3


def g_functions(t: complex, lam: complex, p: BeamParams):
    """Boundary symbols (g1, g2, g3) entering the collocation rows.

    g1 multiplies the shear-angle row, g2 the force feedback row, g3 the
    moment feedback row (the latter two already divided by the lambda powers
    shared along their rows).
    """
    if abs(t) < 1e-14 or abs(lam) < 1e-14:
        raise ZeroDenominator("g functions need t != 0 and lambda != 0")
    g1 = -t + lam**2 / t
    g2 = (p.k2 * t + (p.k1 + t) * lam) / (lam * t)
    g3 = (-(t**2) + lam**2) * (p.k3 * t + lam * (p.k4 + lam)) / (lam**2 * t)
    return g1, g2, g3


def _matrix(lam: np.ndarray, p: BeamParams) -> np.ndarray:
    """Collocation matrices of shape lam.shape + (4, 4), stabilized entries.

    The exponentials are evaluated as e^{t_i} = e^{+-lambda} e^{+-delta}
    with delta = t - lambda = +- i lambda sqrt(b)/(t + lambda).  Computing
    e^{t_i} directly loses |Im t_i| * eps of phase to the rounding of t_i,
    which at |lambda| ~ 10^3 already drowns the O(1/lambda^4) tail of f;
    the factored form keeps every entry accurate to a few ulp because the
    evaluation point lambda itself is exact.
    """
    sb = np.sqrt(p.b)
    t1, t3 = _roots(lam, p.b)
    dl1 = 1j * lam * sb / (t1 + lam)    # t1 - lambda, cancellation-free
    dl3 = -1j * lam * sb / (t3 + lam)   # t3 - lambda
    ez = np.exp(lam)
    e1 = ez * np.exp(dl1)
    e3 = ez * np.exp(dl3)
    exps = np.stack([e1, 1.0 / e1, e3, 1.0 / e3], axis=-1)

    ts = np.stack([t1, -t1, t3, -t3], axis=-1)
    lamx = lam[..., None]
    l2mt2 = np.stack([-1j * lam * sb, -1j * lam * sb, 1j * lam * sb, 1j * lam * sb], axis=-1)
    d = l2mt2 / ts
    g2 = (p.k2 * ts + (p.k1 + ts) * lamx) / (lamx * ts)
    g3 = d * (p.k3 * ts + lamx * (p.k4 + lamx)) / lamx**2
    ones = np.ones_like(ts)
    return np.stack([ones, d, exps * g2, exps * g3], axis=-2)


def paired_exponentials(lam, b: float):
    """(e^{t1+t3}, e^{-t1-t3}, e^{t1-t3}, e^{t3-t1}) with stable phases.

    Built from e^{2 lambda} and the small shifts t_i - lambda so the phase
    error stays at a few ulp even when |Im lambda| is large; see _matrix.
    """
    arr = np.asarray(lam, dtype=complex)
    _check_nonzero(arr)
    sb = np.sqrt(b)
    t1, t3 = _roots(arr, b)
    dl1 = 1j * arr * sb / (t1 + arr)
    dl3 = -1j * arr * sb / (t3 + arr)
    ep = np.exp(2.0 * arr) * np.exp(dl1 + dl3)
    dp = np.exp(dl1 - dl3)
    return ep, 1.0 / ep, dp, 1.0 / dp


def boundary_matrix(lam: complex, p: BeamParams) -> CharMatrix:
    """Assemble the 4x4 system (clamped end; shear row; two tip feedback rows)."""
    require_unit_speed(p)
    arr = np.asarray(lam, dtype=complex)
    _check_nonzero(arr)
    return CharMatrix(_matrix(arr, p), complex(lam), p)


def char_fn(lam, p: BeamParams):
    """Characteristic function f(lambda) = -det M(lambda) / (16 b).

    Vectorized over any leading shape of ``lam``; determinant by
    partial-pivoted LU on the 4x4 blocks.  Zeros with Re(lambda) < 0 are
    exactly the eigenvalues of the damped beam.
    """
    require_unit_speed(p)
    arr = np.asarray(lam, dtype=complex)
    _check_nonzero(arr)
    det = np.linalg.det(_matrix(arr, p))
    val = -det / (16.0 * p.b)
    return complex(val) if arr.ndim == 0 else val


def entire_char_fn(lam, p: BeamParams):
    """Single-valued surrogate F = f * t1 * t3 for contour work.

    f itself jumps sign across the horizontal rays Im(lambda) = +-sqrt(b),
    Re(lambda) <= 0 where the composed square roots switch sheets; the
    product with t1 t3 removes the jump, is analytic off the origin, and
    has the same zeros as f away from the branch points.
    """
    arr = np.asarray(lam, dtype=complex)
    t1, t3 = _roots(arr, p.b)
    val = char_fn(arr, p) * t1 * t3
    return complex(val) if arr.ndim == 0 else val


def _central_diff(fn, lam: complex) -> complex:
    step = 1e-7 * max(1.0, abs(lam))
    return (fn(lam + step) - fn(lam - step)) / (2.0 * step)


def _guard_branch_points(lam: complex, b: float) -> None:
    sb = float(np.sqrt(b))
    if min(abs(lam), abs(lam - 1j * sb), abs(lam + 1j * sb)) < 1e-6:
        raise NearBranchPoint(f"lambda={lam} within 1e-6 of a branch point")


def char_fn_derivative(lam: complex, p: BeamParams) -> complex:
    """Central-difference f'(lambda), step 1e-7 * max(1, |lambda|)."""
    _guard_branch_points(lam, p.b)
    return complex(_central_diff(lambda z: char_fn(z, p), complex(lam)))


def entire_char_fn_derivative(lam: complex, p: BeamParams) -> complex:
    """Central-difference derivative of the single-valued surrogate F."""
    _guard_branch_points(lam, p.b)
    return complex(_central_diff(lambda z: entire_char_fn(z, p), complex(lam)))
