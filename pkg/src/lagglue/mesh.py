"""Quadrature samples of the glued surface, residual fields and mesh export."""
import csv
import io
from dataclasses import dataclass

import numpy as np

from .ambient import induced_metric, translator_residual
from .glue import REGION_NAMES, glued_eval
from .lawlor import sphere_basis
from .quadrature import gauss_legendre, sphere_rule
from .weighted import RadiusField


@dataclass(frozen=True)
class Resolution:
    """Sphere product rule order and radial panels.

    The radial variable is l = asinh(y / c); ``panels_per_unit`` Gauss-Legendre
    panels of order ``order`` per unit of l. One dyadic annulus has l-width
    log 2, so the default gives about 17 radial nodes per annulus.
    """

    n_polar: int = 12
    n_azim: int = 0
    panels_per_unit: float = 6.0
    order: int = 4
    c: float = 0.5
    transition_boost: int = 8

    def refined(self, factor=2):
        return Resolution(self.n_polar * factor, self.n_azim * factor, self.panels_per_unit * factor, self.order,
                          self.c, self.transition_boost)


@dataclass
class MeshSamples:
    x: np.ndarray
    y: np.ndarray
    weights: np.ndarray
    region: np.ndarray
    side: np.ndarray
    r: np.ndarray
    r_amb: np.ndarray
    rho: np.ndarray
    f: np.ndarray
    theta: np.ndarray
    grad_theta: np.ndarray
    point: np.ndarray

    @property
    def size(self):
        return self.y.size


def radial_rule(y_max, res, window=None):
    """Gauss-Legendre panels in l = asinh(y / c) on [-y_max, y_max]; returns y, dy-weights."""
    lmax = np.arcsinh(y_max / res.c)
    n_pan = max(2, int(np.ceil(2 * lmax * res.panels_per_unit)))
    edges = np.linspace(-lmax, lmax, n_pan + 1)
    ys, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        sub = 1
        if window is not None:
            ya, yb = sorted(np.abs(res.c * np.sinh([a, b])))
            if yb >= window[0] and ya <= window[1] and not (a < 0 < b):
                sub = res.transition_boost
        for a2, b2 in zip(np.linspace(a, b, sub + 1)[:-1], np.linspace(a, b, sub + 1)[1:]):
            l, w = gauss_legendre(res.order, a2, b2)
            ys.append(res.c * np.sinh(l))
            ws.append(w * res.c * np.cosh(l))
    return np.concatenate(ys), np.concatenate(ws)


def transition_window(surface):
    """Range of |y| that contains the cutoff annulus t^tau <= r <= 2 t^tau for every x."""
    s = surface.t ** (surface.tau - 1.0)
    return 0.6 * s, 2.2 * s + 0.5


def default_y_extent(surface):
    """|y| beyond which every point lies in the wing region with margin."""
    return 3.0 * surface.t ** (surface.tau - 1.0) + 1.0


def _theta_and_gradient(surface, x, y, h=1e-5):
    basis = sphere_basis(x)
    gf = glued_eval(surface, x, y, basis)
    th = translator_residual(gf.point, gf.jacobian, surface.bg)
    m = surface.m
    dth = np.empty(x.shape[:-1] + (m,))
    for k in range(m - 1):
        xs = []
        for sgn in (1.0, -1.0):
            xx = x + sgn * h * basis[..., :, k]
            xx /= np.linalg.norm(xx, axis=-1, keepdims=True)
            g2 = glued_eval(surface, xx, y)
            xs.append(translator_residual(g2.point, g2.jacobian, surface.bg))
        dth[..., k] = (xs[0] - xs[1]) / (2 * h)
    hy = h * np.maximum(1.0, np.abs(y))
    gp, gm = glued_eval(surface, x, y + hy), glued_eval(surface, x, y - hy)
    dth[..., -1] = (translator_residual(gp.point, gp.jacobian, surface.bg)
                    - translator_residual(gm.point, gm.jacobian, surface.bg)) / (2 * hy)
    g = induced_metric(gf.jacobian)
    grad = np.sqrt(np.einsum("...i,...i->...", dth, np.linalg.solve(g, dth[..., None])[..., 0]))
    return gf, th, grad, g


def sample_mesh(surface, res=Resolution(), y_max=None, with_gradient=True, chunk=20000):
    """Nodes, dV weights, region tags, rho_t, f and Theta (with |grad Theta|).

    The sphere rule is a Gauss-Jacobi x trapezoid product, exact to degree
    ``min(2 n_polar - 1, n_azim - 1)`` (default n_azim = 2 n_polar).
    """
    m = surface.m
    if y_max is None:
        y_max = default_y_extent(surface)
    sx, sw = sphere_rule(m, res.n_polar, res.n_azim or None)
    ry, rw = radial_rule(y_max, res, transition_window(surface))
    X = np.repeat(sx, ry.size, axis=0)
    Y = np.tile(ry, sx.shape[0])
    W0 = np.repeat(sw, ry.size) * np.tile(rw, sx.shape[0])
    out = {k: [] for k in ("theta", "grad", "vol", "region", "side", "r", "r_amb", "point")}
    for i in range(0, Y.size, chunk):
        xs, ys = X[i:i + chunk], Y[i:i + chunk]
        if with_gradient:
            gf, th, grad, g = _theta_and_gradient(surface, xs, ys)
        else:
            gf = glued_eval(surface, xs, ys)
            th = translator_residual(gf.point, gf.jacobian, surface.bg)
            grad, g = np.full(ys.shape, np.nan), induced_metric(gf.jacobian)
        out["theta"].append(th)
        out["grad"].append(grad)
        out["vol"].append(np.sqrt(np.linalg.det(g)))
        for key in ("region", "side", "r", "r_amb", "point"):
            out[key].append(getattr(gf, key))
    cat = {k: np.concatenate(v) for k, v in out.items()}
    field = RadiusField(surface.t, surface.R_hat, surface.eps)
    return MeshSamples(
        X, Y, W0 * cat["vol"], cat["region"], cat["side"], cat["r"], cat["r_amb"], field(cat["r_amb"]),
        surface.bg.f(cat["point"]), cat["theta"], cat["grad"], cat["point"],
    )


def annulus_rule(m, R1, R2, n_polar=8, n_r=32):
    """Product rule on the flat annulus {R1 <= |x| <= R2} in R^m: nodes, radii, weights."""
    sx, sw = sphere_rule(m, n_polar)
    r, wr = gauss_legendre(n_r, R1, R2)
    X = (sx[:, None, :] * r[None, :, None]).reshape(-1, m)
    W = (sw[:, None] * (wr * r ** (m - 1))[None, :]).ravel()
    return X, np.tile(r, sx.shape[0]), W


def mesh_csv(samples):
    """RFC 4180 CSV of node parameters, region, ambient coordinates, rho and Theta."""
    m = samples.x.shape[1]
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\r\n")
    head = [f"x{j + 1}" for j in range(m)] + ["y", "region"]
    head += [f"re_z{j + 1}" for j in range(m)] + [f"im_z{j + 1}" for j in range(m)] + ["rho", "theta"]
    wr.writerow(head)
    for i in range(samples.size):
        row = [repr(float(v)) for v in samples.x[i]] + [repr(float(samples.y[i])), REGION_NAMES[int(samples.region[i])]]
        row += [repr(float(v)) for v in samples.point[i].real] + [repr(float(v)) for v in samples.point[i].imag]
        row += [repr(float(samples.rho[i])), repr(float(samples.theta[i]))]
        wr.writerow(row)
    return buf.getvalue()


def mesh_obj(points, projection=None):
    """ASCII OBJ point cloud ('v x y z' lines) of a real 3-plane projection of C^m.

    ``projection`` is a 3 x 2m real matrix acting on (Re z, Im z); the
    default picks (Re z_1, Re z_m, Im z_m).
    """
    pts = np.asarray(points)
    m = pts.shape[-1]
    real = np.concatenate([pts.real, pts.imag], axis=-1)
    if projection is None:
        projection = np.zeros((3, 2 * m))
        projection[0, 0] = 1.0
        projection[1, m - 1] = 1.0
        projection[2, 2 * m - 1] = 1.0
    xyz = real @ np.asarray(projection).T
    lines = ["# point cloud, %d vertices" % len(xyz)]
    lines += ["v %.17g %.17g %.17g" % tuple(v) for v in xyz]
    return "\n".join(lines) + "\n"
