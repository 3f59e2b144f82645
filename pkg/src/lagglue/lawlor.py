"""Lawlor necks: the a <-> (phi, A) correspondence, profiles psi_j and the immersion N.

Conventions. p(x) = prod_j (1 + a_j x^2) and P(x) = (p(x) - 1) / x^2, a
polynomial with P(0) = sum a_j. Then

    psi_j(y) = a_j int_{-inf}^y dx / ((1 + a_j x^2) sqrt(P(x))),   phi_j = psi_j(+inf),
    A = int dx / (2 sqrt(P(x))),
    N(x, y) = (x_j e^{i psi_j(y)} sqrt(1/a_j + y^2))_j,   x in S^{m-1}.

Integrals are computed in u = arctan(x), where every integrand is smooth
and bounded on [-pi/2, pi/2].
"""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .ambient import FrameData
from .errors import InversionFailure, QuadratureFailure
from .quadrature import adaptive_integral, adaptive_panels, gauss_legendre

PROFILE_FORMAT = "lagglue-neck-profile/1"


def elementary_symmetric(a):
    """Coefficients e_0 = 1, e_1, ..., e_m of prod (1 + a_j X)."""
    e = np.array([1.0])
    for a_j in a:
        e = np.concatenate([e, [0.0]]) + a_j * np.concatenate([[0.0], e])
    return e


def big_p(x, a):
    """P(x) = (p(x) - 1) / x^2 evaluated without cancellation, and P'(x)."""
    e = elementary_symmetric(a)
    x = np.asarray(x, float)
    x2 = x * x
    val = np.zeros_like(x2)
    der = np.zeros_like(x2)
    for k in range(len(e) - 1, 0, -1):
        val = val * x2 + e[k]
    for k in range(len(e) - 1, 1, -1):
        der = der * x2 + 2 * (k - 1) * e[k]
    return val, der * x


def _u_integrands(u, a):
    """Rows: a_j dx/((1 + a_j x^2) sqrt P) for each j, then dx/sqrt P, in u = arctan x."""
    a = np.asarray(a, float)
    m = a.size
    e = elementary_symmetric(a)
    c, s = np.cos(u), np.sin(u)
    c2, s2 = c * c, s * s
    # Q = P cos^{2(m-1)} u = sum_k e_k s^{2(k-1)} c^{2(m-k)}
    q = sum(e[k] * s2 ** (k - 1) * c2 ** (m - k) for k in range(1, m + 1))
    base = c ** (m - 3) / np.sqrt(q)
    rows = [a_j * c2 / (c2 + a_j * s2) * base for a_j in a]
    rows.append(base)
    return np.array(rows)


@dataclass(frozen=True)
class LawlorParams:
    a: tuple

    def __post_init__(self):
        a = tuple(float(v) for v in self.a)
        if len(a) < 3:
            raise ValueError("Lawlor necks are supported for m >= 3")
        if min(a) <= 0:
            raise ValueError("all a_j must be positive")
        object.__setattr__(self, "a", a)

    @property
    def m(self):
        return len(self.a)

    def scaled(self, t):
        """Parameters of the neck t N (a -> a / t^2)."""
        return LawlorParams(tuple(v / t**2 for v in self.a))


@dataclass(frozen=True)
class AngleData:
    phi: tuple
    A: float
    sum_defect: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "phi", tuple(float(v) for v in self.phi))

    @property
    def admissible(self):
        p = np.array(self.phi)
        return bool(abs(p.sum() - np.pi) < 1e-9 and np.all((p > 0) & (p < np.pi)) and self.A > 0)


def angles_from_params(params, tol=1e-12):
    """phi_j and A by adaptive Gauss-Kronrod on (0, pi/2) and evenness.

    ``sum_defect`` = sum(phi) - pi is a quadrature quality diagnostic.
    """
    if tol < 1e-14:
        raise ValueError("tol below 1e-14 is not attainable in double precision")
    a = np.asarray(params.a)
    edges = np.linspace(0.0, 0.5 * np.pi, 9)
    vals = adaptive_panels(lambda u: _u_integrands(u, a), edges, 0.25 * tol).sum(axis=1)
    phi = 2.0 * vals[:-1]
    A = float(vals[-1])
    return AngleData(tuple(phi), A, float(phi.sum() - np.pi))


def _angle_residual(b, target):
    ad = angles_from_params(LawlorParams(tuple(np.exp(b))))
    return np.concatenate([np.array(ad.phi[:-1]) - target.phi[:-1], [np.log(ad.A / target.A)]])


def params_from_angles(target, tol=1e-11, a0=None, max_iter=50, fd_step=1e-6):
    """Newton iteration on b = log a for (phi_1, ..., phi_{m-1}, A).

    The last angle is dependent through sum(phi) = pi and is dropped. The A
    equation is solved in the form log(A / A_target) = 0.
    """
    m = len(target.phi)
    if not target.admissible:
        raise ValueError("target angles must satisfy sum(phi) = pi, phi_j in (0, pi), A > 0")
    if a0 is None:
        # A(c a) = A(a) / c
        a_unit = angles_from_params(LawlorParams((1.0,) * m)).A
        a0 = np.full(m, a_unit / target.A)
    b = np.log(np.asarray(a0, float))
    res = _angle_residual(b, target)
    best = (np.linalg.norm(res), b.copy())
    for it in range(max_iter):
        if np.max(np.abs(res)) < tol:
            return LawlorParams(tuple(np.exp(b)))
        jac = np.empty((m, m))
        for k in range(m):
            db = np.zeros(m)
            db[k] = fd_step
            jac[:, k] = (_angle_residual(b + db, target) - _angle_residual(b - db, target)) / (2 * fd_step)
        step = np.linalg.solve(jac, -res)
        lam = 1.0
        while lam > 1e-4:
            trial = b + lam * step
            new = _angle_residual(trial, target)
            if np.linalg.norm(new) < np.linalg.norm(res):
                break
            lam *= 0.5
        b, res = trial, new
        if np.linalg.norm(res) < best[0]:
            best = (np.linalg.norm(res), b.copy())
    if np.max(np.abs(res)) < tol:
        return LawlorParams(tuple(np.exp(b)))
    raise InversionFailure("Newton did not converge", residual=best[0], best=tuple(np.exp(best[1])))


def params_for_angles(phi, a_min=4.0, tol=1e-11):
    """Neck with angles ``phi`` normalised so that min a_j = a_min.

    A neck with max_j a_j^{-1/2} = a_min^{-1/2} has its waist inside the
    ball of that radius; the scale t is applied separately.
    """
    m = len(phi)
    a_unit = angles_from_params(LawlorParams((1.0,) * m)).A
    par = params_from_angles(AngleData(tuple(phi), a_unit), tol=tol)
    a = np.array(par.a)
    return LawlorParams(tuple(a * a_min / a.min()))


def tail_ymax(params, eps):
    """|y| beyond which psi_j(-|y|) and phi_j - psi_j(|y|) drop below ``eps``.

    Uses the leading tail term |y|^{-m} / (m sqrt(prod a)).
    """
    a = np.asarray(params.a)
    m = a.size
    return float((1.0 / (m * np.sqrt(np.prod(a)) * eps)) ** (1.0 / m))


def _exact_derivatives(y, a):
    """psi_j'(y), Psi_0'(y) and their y-derivatives."""
    a = np.asarray(a)
    y = np.asarray(y, float)
    P, dP = big_p(y, a)
    inv = 1.0 / np.sqrt(P)
    den = 1.0 + a * y[..., None] ** 2
    d1 = a / den * inv[..., None]
    d2 = d1 * (-2 * a * y[..., None] / den - 0.5 * (dP / P)[..., None])
    g1 = inv
    g2 = -0.5 * dP / P * inv
    return d1, d2, g1, g2


_GL_X, _GL_W = np.polynomial.legendre.leggauss(24)


def _upper_tails(u, a):
    """int_u^{pi/2} of the u-integrands for each u (columns), by 24-point Gauss-Legendre."""
    u = np.asarray(u, float)
    half = 0.5 * (0.5 * np.pi - u)
    mid = 0.5 * (0.5 * np.pi + u)
    nodes = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    vals = _u_integrands(nodes, a).reshape(-1, u.size, _GL_X.size)
    return half * (vals @ _GL_W)


@dataclass
class NeckProfile:
    """Tabulated psi_j and Psi_0(y) = int_{-inf}^y dx / sqrt P on a symmetric grid.

    Columns of ``values``: psi_1, ..., psi_m, Psi_0. Between nodes a cubic
    Hermite interpolant with exact derivative data is used; beyond the grid
    the tail integrals are evaluated directly.
    """

    params: LawlorParams
    y_grid: np.ndarray
    values: np.ndarray
    angle_data: AngleData
    _spline: Optional[CubicHermiteSpline] = field(default=None, repr=False)

    def __post_init__(self):
        d1, _, g1, _ = _exact_derivatives(self.y_grid, self.params.a)
        derivs = np.column_stack([d1, g1])
        self._spline = CubicHermiteSpline(self.y_grid, self.values, derivs, axis=0)

    @property
    def m(self):
        return self.params.m

    @property
    def y_max(self):
        return float(self.y_grid[-1])

    @property
    def phi(self):
        return np.array(self.angle_data.phi)

    @property
    def totals(self):
        return np.concatenate([self.phi, [2.0 * self.angle_data.A]])

    def evaluate(self, y):
        """Return (psi, psi', psi'', Psi_0, Psi_0') at ``y``; psi has shape (..., m)."""
        y = np.asarray(y, float)
        a = self.params.a
        d1, d2, g1, _ = _exact_derivatives(y, a)
        shape = y.shape
        yf = y.ravel()
        out = np.empty((yf.size, self.m + 1))
        inside = np.abs(yf) <= self.y_max
        if inside.any():
            out[inside] = self._spline(yf[inside])
        if (~inside).any():
            yo = yf[~inside]
            tails = _upper_tails(np.arctan(np.abs(yo)), a).T
            upper = self.totals[None, :] - tails
            out[~inside] = np.where((yo > 0)[:, None], upper, tails)
        out = out.reshape(shape + (self.m + 1,))
        return out[..., :-1], d1, d2, out[..., -1], g1

    def save(self, path):
        np.savez(
            path,
            format=np.array(PROFILE_FORMAT),
            a=np.array(self.params.a),
            y_grid=self.y_grid,
            values=self.values,
            phi=np.array(self.angle_data.phi),
            A=np.array(self.angle_data.A),
            sum_defect=np.array(self.angle_data.sum_defect),
        )

    @classmethod
    def load(cls, path):
        with np.load(path) as data:
            if str(data["format"]) != PROFILE_FORMAT:
                raise ValueError(f"unsupported profile format {data['format']}")
            params = LawlorParams(tuple(data["a"]))
            ad = AngleData(tuple(data["phi"]), float(data["A"]), float(data["sum_defect"]))
            return cls(params, data["y_grid"].copy(), data["values"].copy(), ad)


def psi_profile(params, y_max=60.0, n=2001, tol=1e-12):
    """Cumulative adaptive quadrature of psi_j and Psi_0 on [-y_max, y_max].

    Nodes are y = c sinh(l) with l uniform and c = min_j a_j^{-1/2}, which
    concentrates them near the waist of the neck.
    """
    if y_max <= 0 or n < 64:
        raise ValueError("need y_max > 0 and n >= 64")
    if n % 2 == 0:
        n += 1
    a = np.asarray(params.a)
    ad = angles_from_params(params, tol=tol)
    c = float(np.min(a) ** -0.5)
    ell = np.linspace(-np.arcsinh(y_max / c), np.arcsinh(y_max / c), n)
    y = c * np.sinh(ell)
    y[n // 2] = 0.0
    u = np.arctan(y)
    f = lambda uu: _u_integrands(uu, a)
    left = adaptive_integral(f, -0.5 * np.pi, u[0], 0.1 * tol)
    pieces = adaptive_panels(f, u, tol)
    cum = np.concatenate([left[:, None], left[:, None] + np.cumsum(pieces, axis=1)], axis=1).T
    return NeckProfile(params, y, cum, ad)


def sphere_basis(x):
    """Orthonormal basis of T_x S^{m-1} with det[x, E] > 0, via a Householder reflection.

    ``x`` has shape (..., m); returns shape (..., m, m-1).
    """
    x = np.asarray(x, float)
    m = x.shape[-1]
    e = np.zeros(m)
    e[0] = 1.0
    sgn = np.where(x[..., :1] >= 0, 1.0, -1.0)
    v = x + sgn * e
    v = v / np.linalg.norm(v, axis=-1, keepdims=True)
    H = np.eye(m) - 2 * v[..., :, None] * v[..., None, :]
    # H e_0 = -sgn x; the other columns span x^perp
    E = H[..., :, 1:].copy()
    full = np.concatenate([x[..., :, None], E], axis=-1)
    flip = np.linalg.det(full) < 0
    E[..., 0] = np.where(flip[..., None], -E[..., 0], E[..., 0])
    return E


def neck_eval(profile, x, y, t=1.0, basis=None, hessian=False):
    """Frame of t N at sphere point ``x`` and height ``y``.

    Jacobian columns are the derivatives along ``basis`` (tangent to the
    sphere at x; default :func:`sphere_basis`) followed by d/dy. The
    optional hessian uses geodesic normal coordinates on the sphere.
    """
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    m = profile.m
    if basis is None:
        basis = sphere_basis(x)
    a = np.asarray(profile.params.a)
    psi, dpsi, ddpsi, _, _ = profile.evaluate(y)
    yy = y[..., None]
    rho = np.sqrt(1.0 / a + yy**2)
    ph = np.exp(1j * psi)
    z = ph * rho
    dz = ph * (1j * dpsi * rho + yy / rho)
    point = t * x * z
    jac = np.empty(x.shape[:-1] + (m, m), complex)
    jac[..., :, :-1] = t * basis * z[..., :, None]
    jac[..., :, -1] = t * x * dz
    hess = None
    if hessian:
        ddz = ph * (1j * dpsi * (1j * dpsi * rho + yy / rho) + 1j * ddpsi * rho + 1j * dpsi * yy / rho
                    + 1.0 / rho - yy**2 / rho**3)
        hess = np.zeros(x.shape[:-1] + (m, m, m), complex)
        for k in range(m - 1):
            hess[..., k, k, :] = -t * x * z
            hess[..., k, -1, :] = t * basis[..., :, k] * dz
            hess[..., -1, k, :] = hess[..., k, -1, :]
        hess[..., -1, -1, :] = t * x * ddz
    return FrameData(point, jac, hess)


def graph_potential(profile, x, y, side_phi=None):
    """Potential V of N as a graph over R^m (side 0) or over D_phi R^m.

    With xi + i eta = D^{-1} N, the one-form sum eta_j d xi_j equals dV:

        V_0   = 1/2 sum x_j^2 rho_j^2 sin psi_j cos psi_j - Psi_0(y) / 2,
        V_phi = 1/2 sum x_j^2 rho_j^2 sin(psi_j - phi_j) cos(psi_j - phi_j) + A - Psi_0(y) / 2,

    both normalised to vanish at the corresponding end. The potential of
    t N is t^2 V.
    """
    x = np.asarray(x, float)
    a = np.asarray(profile.params.a)
    psi, _, _, Psi0, _ = profile.evaluate(y)
    rho2 = 1.0 / a + np.asarray(y, float)[..., None] ** 2
    if side_phi is None:
        ang = psi
        const = -0.5 * Psi0
    else:
        ang = psi - np.asarray(side_phi)
        const = profile.angle_data.A - 0.5 * Psi0
    return 0.5 * np.sum(x**2 * rho2 * np.sin(ang) * np.cos(ang), axis=-1) + const
