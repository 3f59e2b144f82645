"""Graphs over the tangent cone: cutoffs, wing and neck potentials, projection."""
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_simpson

from .errors import ProjectionFailure
from .grim import IntersectionRecord, gamma0, inverse_gudermannian
from .quadrature import gauss_legendre


def smooth_step(s):
    """C-infinity step on [1, 2] with first and second derivatives.

    eta(s) = g(s - 1) / (g(s - 1) + g(2 - s)), g(x) = exp(-1/x); eta(1.5) = 1/2.
    """
    s = np.asarray(s, float)
    sig = np.clip(s - 1.0, 1e-3, 1.0 - 1e-3)
    inside = (s > 1.0) & (s < 2.0)
    sig = np.where(inside, s - 1.0, sig)
    tau = 1.0 - sig
    # ratio form B / A = exp(1/sig - 1/tau) avoids underflow of both terms
    with np.errstate(over="ignore"):
        q = np.exp(np.clip(1.0 / sig - 1.0 / tau, -700, 700))
    eta = 1.0 / (1.0 + q)
    # log-derivatives of A = g(sig) and B = g(1 - sig) with respect to s
    la1, la2 = 1.0 / sig**2, -2.0 / sig**3
    lb1, lb2 = -1.0 / tau**2, -2.0 / tau**3
    # eta = 1 / (1 + exp(L)), L = lb - la, d = L', e = L''
    d, e = lb1 - la1, lb2 - la2
    w = eta * (1.0 - eta)
    d1 = -w * d
    d2 = -d1 * (1.0 - 2.0 * eta) * d - w * e
    eta = np.where(s <= 1.0, 0.0, np.where(s >= 2.0, 1.0, eta))
    d1 = np.where(inside, d1, 0.0)
    d2 = np.where(inside, d2, 0.0)
    return eta, d1, d2


@dataclass(frozen=True)
class CutoffSpec:
    tau: float = 0.9

    def __post_init__(self):
        if not 0.0 < self.tau < 1.0:
            raise ValueError("tau must lie in (0, 1)")


def cutoff_eval(spec, t, r):
    """(eta(t^-tau r), d/dr, d^2/dr^2)."""
    sc = t ** (-spec.tau)
    e, d1, d2 = smooth_step(np.asarray(r, float) * sc)
    return e, d1 * sc, d2 * sc * sc


@dataclass(frozen=True)
class ConeChart:
    """Tangent cone at a singular point: R^m mapped by U_0 (side 0) and U_0 D_phi (side phi)."""

    vertex: np.ndarray
    U0: np.ndarray
    D: np.ndarray

    @classmethod
    def from_record(cls, record: IntersectionRecord, phi):
        m = len(phi)
        u0 = np.ones(m, complex)
        u0[-1] = np.exp(1j * (record.s0 - 0.5 * np.pi))
        return cls(np.asarray(record.point, complex), u0, np.exp(1j * np.asarray(phi, float)))

    def plane(self, side):
        """Diagonal of the unitary map R^m -> tangent plane of the given side (0 or 1)."""
        return self.U0 * (self.D if side else 1.0)

    def frame(self, side):
        return np.diag(self.plane(side))


class WingGraph:
    """A Grim Reaper curve as a graph over its tangent line at parameter ``s``.

    With w(x) = e^{-i(s - pi/2)} (gamma0(x) - gamma0(s)), Re w = xi_m is the
    coordinate along the line and Im w = h = H'(xi_m) the graph height.
    The graph regime is |x - s| < pi/2 with |x| < pi/2.
    """

    def __init__(self, s, n_gauss=32):
        self.s = float(s)
        self.x_lo = max(-0.5 * np.pi, self.s - 0.5 * np.pi)
        self.x_hi = min(0.5 * np.pi, self.s + 0.5 * np.pi)
        self._gx, self._gw = np.polynomial.legendre.leggauss(n_gauss)
        with np.errstate(divide="ignore"):
            self.xi_lo = float(self.re_w(self.x_lo)) if self.x_lo > -0.5 * np.pi else -np.inf
            self.xi_hi = float(self.re_w(self.x_hi)) if self.x_hi < 0.5 * np.pi else np.inf
        # monotone table for Newton starting values, clustered at the ends
        u = 0.5 * (1.0 - np.cos(np.linspace(0.0, np.pi, 4001)[1:-1]))
        self._tx = self.x_lo + (self.x_hi - self.x_lo) * u
        self._txi = self.re_w(self._tx)

    def re_w(self, x):
        s = self.s
        return np.sin(s) * np.log(np.cos(s) / np.cos(x)) + np.cos(s) * (x - s)

    def im_w(self, x):
        s = self.s
        return np.cos(s) * np.log(np.cos(s) / np.cos(x)) - np.sin(s) * (x - s)

    def dre_w(self, x):
        return np.cos(x - self.s) / np.cos(x)

    def x_of_xi(self, xi, tol=1e-13, max_iter=100):
        """Curve parameter with Re w(x) = xi (safeguarded Newton)."""
        xi = np.asarray(xi, float)
        if np.any(xi <= self.xi_lo) or np.any(xi >= self.xi_hi):
            raise ProjectionFailure("point outside the graph regime of the wing", xi=float(np.max(np.abs(xi))))
        lo = np.full(xi.shape, self.x_lo + 1e-15)
        hi = np.full(xi.shape, self.x_hi - 1e-15)
        finite = np.isfinite(self._txi)
        x = np.clip(np.interp(xi, self._txi[finite], self._tx[finite]), lo, hi)
        for _ in range(max_iter):
            g = self.re_w(x) - xi
            lo = np.where(g < 0, x, lo)
            hi = np.where(g > 0, x, hi)
            xn = x - g / self.dre_w(x)
            bad = ~((xn > lo) & (xn < hi))
            xn = np.where(bad, 0.5 * (lo + hi), xn)
            delta = np.max(np.abs(xn - x), initial=0.0)
            x = xn
            if delta <= tol:
                # quadratic convergence: one more step reaches rounding level
                x = np.clip(x - (self.re_w(x) - xi) / self.dre_w(x), lo, hi)
                break
        if not np.all(np.isfinite(x)):
            raise ProjectionFailure("wing parameter not representable in double precision")
        return x

    def derivatives(self, xi):
        """x(xi), h = H', h' = H'', and H(xi) with H(0) = 0."""
        x = self.x_of_xi(xi)
        h = self.im_w(x)
        dh = np.tan(x - self.s)
        half = 0.5 * (x - self.s)
        nodes = self.s + half[..., None] * (1.0 + self._gx)
        integrand = self.im_w(nodes) * self.dre_w(nodes)
        H = half * (integrand @ self._gw)
        return x, h, dh, H

    def arclength_blend(self, xi, eps):
        """Monotone reparametrization S(xi) of the curve by arclength.

        Equals the arclength of the graph point for |xi| <= 0.6 eps and
        s* + xi (unit speed) for |xi| >= eps. Returns (S, dS/dxi).
        """
        xi = np.asarray(xi, float)
        a0, a1 = 0.6 * eps, eps
        S = np.empty_like(xi)
        dS = np.empty_like(xi)
        far = np.abs(xi) >= a1
        sgn = np.sign(xi)
        ends = {}
        for sg in (-1.0, 1.0):
            x_end = self.x_of_xi(np.array(sg * a1))
            ends[sg] = float(inverse_gudermannian(x_end)) - sg * a1
        shift = np.where(sgn >= 0, ends[1.0], ends[-1.0])
        S[far] = shift[far] + xi[far]
        dS[far] = 1.0
        near = ~far
        if near.any():
            xn = xi[near]
            x = self.x_of_xi(xn)
            sg = inverse_gudermannian(x)
            dsg = 1.0 / np.cos(x - self.s)
            chi, dchi, _ = smooth_step(1.0 + (np.abs(xn) - a0) / (a1 - a0))
            dchi = dchi * np.sign(xn) / (a1 - a0)
            lin = shift[near] + xn
            S[near] = (1 - chi) * sg + chi * lin
            dS[near] = (1 - chi) * dsg + chi + dchi * (lin - sg)
        return S, dS


def project_to_graph(surface_eval, plane, vertex, sigma, r, param0, tol=1e-11, max_iter=50):
    """Write a surface point as vertex + plane (r sigma + i grad).

    ``surface_eval(param) -> FrameData`` for a single parameter vector;
    ``plane`` is the diagonal (or full matrix) of the unitary map R^m -> cone plane.
    Newton on Re(plane^{-1}(F - vertex)) = r sigma.

    Returns
    -------
    grad : ndarray (m,)
        Components of grad u in the frame J (cone tangent basis).
    displacement : ndarray (m,) complex
        F - (vertex + plane r sigma).
    param : ndarray
        Surface parameter of the point.
    """
    P = np.diag(plane) if np.ndim(plane) == 1 else np.asarray(plane)
    Pinv = np.conj(P.T)
    target = r * np.asarray(sigma, float)
    par = np.array(param0, float)
    res = np.inf
    for _ in range(max_iter):
        fr = surface_eval(par)
        w = Pinv @ (fr.point - vertex)
        g = np.real(w) - target
        res = np.linalg.norm(g)
        if res < tol * max(1.0, r):
            grad = np.imag(w)
            return grad, fr.point - (vertex + P @ target), par
        step = np.linalg.solve(np.real(Pinv @ fr.jacobian), g)
        par = par - step
    raise ProjectionFailure("Newton projection did not converge", residual=res, last=par)


def recover_potential(r, grad_r, kind="wing"):
    """Integrate d u / d r along a ray sampled on a monotone log-spaced grid.

    Composite Simpson in l = log r; anchored so that u -> 0 at the small-r
    end (``kind='wing'``) or at the large-r end (``kind='neck'``).
    """
    r = np.asarray(r, float)
    grad_r = np.asarray(grad_r, float)
    ell = np.log(r)
    u = cumulative_simpson(grad_r * r, x=ell, initial=0.0)
    if kind == "neck":
        u = u - u[-1]
    elif kind != "wing":
        raise ValueError("kind must be 'wing' or 'neck'")
    return u
