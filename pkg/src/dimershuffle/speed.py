"""Speed of growth: closed form, symmetries, complex-analytic route, Hessians.

The closed form evaluates v from rho_+/- = pi*(rho_1 +/- rho_2) through an
arccos of a clamped algebraic expression; on the axes rho_+ rho_- = 0 the
symmetry-forced values are dispatched directly so the sign factor is never
evaluated at 0.  The equivalent route goes through the diffeomorphism
z -> (arg G(z), arg G(1/z)) from the open first quadrant onto
(pi/2, pi) x (pi, 3pi/2), inverted by a damped Newton iteration with the
analytic Jacobian; square roots use the two-logarithm branch with arguments
in (-pi/2, 3pi/2), never a principal root.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi


def c_param(a):
    if not 0 < a <= 1:
        raise ValueError(f"a must be in (0, 1], got {a}")
    return a / (1.0 + a * a)


def rho_pm(rho):
    """(rho_plus, rho_minus) = pi*(rho1+rho2), pi*(rho1-rho2)."""
    return math.pi * (rho[0] + rho[1]), math.pi * (rho[0] - rho[1])


def in_open_square(rho):
    return abs(rho[0]) + abs(rho[1]) < 1.0


@dataclass
class SlopePM:
    plus: float
    minus: float


def sigma_value(pm, c):
    """The arccos argument: -(cos r- + cos r+ + sqrt(...))/2, clamped to [-1, 1].

    A clamp defect beyond 1e-9 signals a bug upstream and raises.
    """
    rp, rm = pm.plus, pm.minus
    rad = (math.cos(rm) - math.cos(rp)) ** 2 + 4 * c * c * math.sin(rm) ** 2 * math.sin(rp) ** 2
    s = -(math.cos(rm) + math.cos(rp) + math.sqrt(rad)) / 2.0
    if s < -1.0 - 1e-9 or s > 1.0 + 1e-9:
        raise ValueError(f"sigma={s} out of [-1,1] beyond tolerance")
    return min(1.0, max(-1.0, s))


def speed_closed_form(rho, a):
    """v(rho) for rho in the open slope square."""
    if not in_open_square(rho):
        raise ValueError(f"slope {rho} outside the open square")
    rp, rm = rho_pm(rho)
    if rm == 0.0:
        return 0.0
    if rp == 0.0:
        return float(rho[0])  # v = rho_-/(2 pi) = rho_1 when rho_2 = -rho_1
    c = c_param(a)
    sig = sigma_value(SlopePM(rp, rm), c)
    sign = 1.0 if rm * rp > 0 else -1.0
    return rm / TWO_PI - (math.pi - math.acos(sig)) / TWO_PI * sign


# ---------------------------------------------------------------------------
# Reflection identities
# ---------------------------------------------------------------------------

REFLECTIONS = ("swap", "antidiagonal", "flip2", "flip1")


def reflect(rho, which):
    """One reflection identity: returns (rho', sign, offset) with
    v(rho) = offset + sign * v(rho').

    flip2 reflects across a horizontal line (slope (r1, -r2)): the reflected
    speed is the top-edge minus right-edge density, which exceeds v by the
    vertical slope component, so v(r1, r2) = -r2 + v(r1, -r2).  flip1 is the
    vertical-line counterpart with offset +r1.
    """
    r1, r2 = rho
    if which == "swap":
        return (r2, r1), -1.0, 0.0
    if which == "antidiagonal":
        return (-r2, -r1), -1.0, r1 - r2
    if which == "flip2":
        return (r1, -r2), 1.0, -r2
    if which == "flip1":
        return (-r1, r2), 1.0, r1
    raise ValueError(f"unknown reflection {which!r}")


# ---------------------------------------------------------------------------
# Branch-cut arithmetic and the harmonic-coordinates route
# ---------------------------------------------------------------------------

def arg_mod(z):
    """Argument normalized into (-pi/2, 3pi/2]."""
    t = math.atan2(z.imag, z.real)
    return t + TWO_PI if t <= -math.pi / 2 else t


def sqrt_shifted(z, c):
    """sqrt(z^2 + 2c) via the product of two logarithms with arguments in
    (-pi/2, 3pi/2); branch cut on the segment i[-sqrt(2c), sqrt(2c)]."""
    s = math.sqrt(2.0 * c)
    if z.real == 0.0 and abs(z.imag) <= s:
        raise ValueError(f"{z} lies on the branch cut")
    za = z + 1j * s
    zb = z - 1j * s
    ang = 0.5 * (arg_mod(za) + arg_mod(zb))
    mod = math.sqrt(abs(za) * abs(zb))
    return mod * cmath.exp(1j * ang)


def g_function(z, c):
    """G(z) = (z - sqrt(z^2+2c)) / sqrt(2c); maps the plane minus the cut
    into the unit disk, and the ellipse contours onto circles."""
    return (z - sqrt_shifted(z, c)) / math.sqrt(2.0 * c)


def v_function(z, c):
    """V(z) = z G'(z)/G(z) = -z / sqrt(z^2 + 2c)."""
    return -z / sqrt_shifted(z, c)


def harmonic_map(z, c):
    """(X, Y) = (arg G(z), arg G(1/z)) for z in the open first quadrant."""
    if not (z.real > 0 and z.imag > 0):
        raise ValueError(f"{z} not in the open first quadrant")
    return arg_mod(g_function(z, c)), arg_mod(g_function(1.0 / z, c))


def invert_harmonic_map(X, Y, c, tol=1e-12, max_iter=100):
    """Solve harmonic_map(z) = (X, Y) by damped Newton in (log|z|, arg z)."""
    if not (math.pi / 2 < X < math.pi and math.pi < Y < 1.5 * math.pi):
        raise ValueError(f"target {(X, Y)} outside (pi/2,pi)x(pi,3pi/2)")
    logr, theta = 0.0, math.pi / 4
    for _ in range(max_iter):
        z = cmath.exp(logr + 1j * theta)
        fx, fy = harmonic_map(z, c)
        rx, ry = fx - X, fy - Y
        res = math.hypot(rx, ry)
        if res < tol:
            return z
        vz = v_function(z, c)
        vz_inv = v_function(1.0 / z, c)
        # d(X,Y)/d(logr, theta)
        j11, j12 = vz.imag, vz.real
        j21, j22 = -vz_inv.imag, -vz_inv.real
        det = j11 * j22 - j12 * j21
        if det == 0.0:
            raise RuntimeError("singular Jacobian in harmonic inversion")
        dlr = -(j22 * rx - j12 * ry) / det
        dth = -(-j21 * rx + j11 * ry) / det
        lam = 1.0
        while lam > 1e-8:
            nt = theta + lam * dth
            nl = logr + lam * dlr
            if 0.0 < nt < math.pi / 2:
                zn = cmath.exp(nl + 1j * nt)
                gx, gy = harmonic_map(zn, c)
                if math.hypot(gx - X, gy - Y) < res:
                    logr, theta = nl, nt
                    break
            lam *= 0.5
        else:
            raise RuntimeError(f"harmonic inversion stalled at residual {res}")
    raise RuntimeError(f"harmonic inversion did not converge for {(X, Y)}")


def speed_harmonic(rho, a, tol=1e-12):
    """v(rho) through the diffeomorphism route; other wedges by reflection."""
    if not in_open_square(rho):
        raise ValueError(f"slope {rho} outside the open square")
    rp, rm = rho_pm(rho)
    if rm == 0.0:
        return 0.0
    if rp == 0.0:
        return float(rho[0])
    cur, sgn, off = rho, 1.0, 0.0
    if math.pi * (cur[0] - cur[1]) < 0:
        cur2, s, o = reflect(cur, "swap")
        off, sgn, cur = off + sgn * o, sgn * s, cur2
    if math.pi * (cur[0] + cur[1]) < 0:
        cur2, s, o = reflect(cur, "antidiagonal")
        off, sgn, cur = off + sgn * o, sgn * s, cur2
    rp, rm = rho_pm(cur)
    assert rp > 0 and rm > 0
    c = c_param(a)
    X = rm / 2.0 + math.pi / 2.0
    Y = -rp / 2.0 + 1.5 * math.pi
    z = invert_harmonic_map(X, Y, c, tol=tol)
    v_core = X / math.pi - 1.0 + cmath.phase(z) / math.pi
    return off + sgn * v_core


# ---------------------------------------------------------------------------
# Small-slope expansion
# ---------------------------------------------------------------------------

def f1(r, c):
    """First expansion coefficient; positive for c < 1/2, identically 0 at c = 1/2."""
    if not 0 < r < 1:
        raise ValueError(f"r must be in (0,1), got {r}")
    if c >= 0.5:
        warnings.warn("f1 vanishes identically as c -> 1/2; expansion degenerate")
    rad = 1 + 2 * (-1 + 8 * c * c) * r * r + r ** 4
    return 0.25 * (1 + r * r - math.sqrt(rad))


def f2(r, c):
    if not 0 < r < 1:
        raise ValueError(f"r must be in (0,1), got {r}")
    rad = 1 + 2 * (-1 + 8 * c * c) * r * r + r ** 4
    return (-1 - r ** 4 + (1 + r * r) * (1 + (-2 + 32 * c * c) * r * r + r ** 4)
            / math.sqrt(rad)) / 48.0


def f1_prime(r, c, h=1e-6):
    return (f1(r + h, c) - f1(r - h, c)) / (2 * h)


def speed_asymptotic(rho, a):
    """Truncation of the small-rho expansion through rho_+^3 (wedge
    0 < rho_- < rho_+, a < 1).

    The leading term is r*rho_+/(2 pi) = rho_-/(2 pi), consistent with the
    closed form; the O(rho_+^5) remainder is verified in the tests.
    """
    if a >= 1.0:
        raise ValueError("the expansion is stated for a < 1")
    rp, rm = rho_pm(rho)
    if not 0 < rm < rp:
        raise ValueError(f"slope {rho} outside the wedge 0 < rho_- < rho_+")
    c = c_param(a)
    r = rm / rp
    v1 = f1(r, c)
    v2 = f2(r, c)
    bracket = math.sqrt(2.0) * rp + (v1 / (6 * math.sqrt(2.0)) + v2 / (math.sqrt(2.0) * v1)) * rp ** 3
    return r * rp / TWO_PI - math.sqrt(v1) / TWO_PI * bracket


# ---------------------------------------------------------------------------
# Hessians
# ---------------------------------------------------------------------------

@dataclass
class HessianResult:
    matrix: np.ndarray
    det: float
    trace: float
    fd_step: float


def hessian_fd(rho, a, step=1e-3, richardson=True):
    """Central-difference Hessian of the closed-form speed, with one
    Richardson refinement; the stencil must stay in the open square."""

    def matrix(h):
        r1, r2 = rho
        pts = [(r1 + dx * h, r2 + dy * h) for dx in (-1, 0, 1) for dy in (-1, 0, 1)]
        if not all(in_open_square(p) for p in pts):
            raise ValueError(f"stencil around {rho} with step {h} exits the square")
        v = {(dx, dy): speed_closed_form((r1 + dx * h, r2 + dy * h), a)
             for dx in (-1, 0, 1) for dy in (-1, 0, 1)}
        h11 = (v[1, 0] - 2 * v[0, 0] + v[-1, 0]) / h ** 2
        h22 = (v[0, 1] - 2 * v[0, 0] + v[0, -1]) / h ** 2
        h12 = (v[1, 1] - v[1, -1] - v[-1, 1] + v[-1, -1]) / (4 * h ** 2)
        return np.array([[h11, h12], [h12, h22]])

    m = matrix(step)
    if richardson:
        m = (4.0 * matrix(step / 2.0) - m) / 3.0
    return HessianResult(m, float(np.linalg.det(m)), float(np.trace(m)), step)


def det_hessian_a1(rho):
    """Closed-form determinant of the Hessian at a = 1 (strictly negative)."""
    rp, rm = rho_pm(rho)
    num = 4 * math.pi ** 2 * math.cos(rp / 2) ** 2 * math.cos(rm / 2) ** 2
    den = (3 + math.cos(rp) + math.cos(rm) - math.cos(rp) * math.cos(rm)) ** 2
    return -num / den
