"""Gauss-Kronrod panel quadrature and product rules on spheres.

All routines are vectorised over panels and over the components of a
vector-valued integrand ``f(x) -> array (K, len(x))``.
"""
import numpy as np
from scipy.special import gamma, roots_jacobi

from .errors import QuadratureFailure

# Kronrod 15-point nodes (non-negative half) and weights, Gauss 7-point weights
_XK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
W_KRONROD = np.concatenate([_WK[:-1], _WK[::-1]])
W_GAUSS = np.zeros(15)
W_GAUSS[1:14:2] = np.concatenate([_WG[:-1], _WG[::-1]])


def gk15(f, a, b):
    """Apply the G7-K15 pair on panels ``[a_i, b_i]``.

    Returns
    -------
    value, error : ndarray (K, P)
    """
    a = np.atleast_1d(np.asarray(a, float))
    b = np.atleast_1d(np.asarray(b, float))
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    x = (mid[:, None] + half[:, None] * NODES[None, :]).ravel()
    vals = np.asarray(f(x), float)
    vals = vals.reshape(vals.shape[0], a.size, 15)
    k = half * (vals @ W_KRONROD)
    g = half * (vals @ W_GAUSS)
    return k, np.abs(k - g)


def adaptive_panels(f, edges, tol, max_panels=20000):
    """Integrate ``f`` over each interval of ``edges`` to absolute ``tol``.

    The tolerance is distributed over panels in proportion to their
    length so that the summed error over all intervals stays below ``tol``.

    Returns
    -------
    ndarray (K, len(edges) - 1)
        Integral over each consecutive interval.
    """
    edges = np.asarray(edges, float)
    total = edges[-1] - edges[0]
    owner = np.arange(edges.size - 1)
    a, b = edges[:-1].copy(), edges[1:].copy()
    out = None
    n_used = a.size
    while a.size:
        val, err = gk15(f, a, b)
        if out is None:
            out = np.zeros((val.shape[0], edges.size - 1))
        ok = err.max(axis=0) <= tol * (b - a) / total
        np.add.at(out.T, owner[ok], val[:, ok].T)
        a, b, owner = a[~ok], b[~ok], owner[~ok]
        if not a.size:
            break
        n_used += a.size
        if n_used > max_panels:
            raise QuadratureFailure("panel budget exhausted", panels=n_used, tol=tol)
        m = 0.5 * (a + b)
        a, b = np.concatenate([a, m]), np.concatenate([m, b])
        owner = np.concatenate([owner, owner])
    return out


def adaptive_integral(f, a, b, tol, max_panels=20000):
    """Adaptive integral of ``f`` over ``[a, b]``; returns ndarray (K,)."""
    return adaptive_panels(f, [a, b], tol, max_panels)[:, 0]


def gauss_legendre(n, a=-1.0, b=1.0):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (a + b) + 0.5 * (b - a) * x, 0.5 * (b - a) * w


def sphere_rule(m, n_polar, n_azim=None):
    """Product rule on the unit sphere S^{m-1} in R^m.

    The last coordinate ``t = x_m`` is integrated with Gauss-Jacobi weight
    ``(1 - t^2)^{(m-3)/2}`` and the remaining sphere recursively; the circle
    uses the trapezoid rule on ``n_azim`` points (default ``2 n_polar``).
    Exact for polynomials of degree ``min(2 n_polar - 1, n_azim - 1)``.

    Returns
    -------
    nodes : ndarray (N, m)
    weights : ndarray (N,)
    """
    if n_azim is None:
        n_azim = 2 * n_polar
    if m == 2:
        ang = 2 * np.pi * (np.arange(n_azim) + 0.5) / n_azim
        return np.column_stack([np.cos(ang), np.sin(ang)]), np.full(n_azim, 2 * np.pi / n_azim)
    alpha = 0.5 * (m - 3)
    t, wt = roots_jacobi(n_polar, alpha, alpha)
    sub, wsub = sphere_rule(m - 1, n_polar, n_azim)
    s = np.sqrt(1.0 - t**2)
    nodes = np.concatenate([np.column_stack([s_i * sub, np.full(len(sub), t_i)]) for t_i, s_i in zip(t, s)])
    weights = np.concatenate([w_i * wsub for w_i in wt])
    return nodes, weights


def sphere_area(m):
    """Surface measure of S^{m-1}."""
    return 2 * np.pi ** (m / 2) / gamma(m / 2)
