"""Rotation-reduced discretization of the glued surface.

For equal-angle motions the glued immersion is invariant under rotations of
the first m - 1 coordinates, so it is determined by its values on the slice
x = (sin theta, 0, ..., 0, cos theta) of the neck sphere. The reduced mesh is
a tensor grid in (theta, sigma) with y = Y0 sinh(l(sigma)); theta is
cell-centred with reflection ghosts across the symmetry axis, sigma is
node-centred with Dirichlet end nodes at |y| = R_out / t. The stretching
sigma(l) = l + smooth bumps + sinh(l) / C concentrates nodes in the two
transition windows, where the cutoff varies on a short l-scale, and makes the
spacing uniform in the cone coordinate beyond |xi| = wing_radius, where the
wings are cylinders rather than cones.

On the slice only coordinates 1 and m of F are nonzero. The orbit direction
e_k (1 < k < m) contributes the column F_1 e_k, so the complex determinant is
F_1^{m-2} (a_1 b_m - a_m b_1) and the volume factor is |F_1|^{m-2} sqrt(det g2),
with a = dF/dtheta and b = dF/dsigma restricted to coordinates (1, m).
"""
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.special import erf

from .ambient import KahlerBackground
from .errors import ChartOverflow, ConfigError, SymmetryRequired
from .glue import glued_eval
from .grid import Grid2D
from .quadrature import sphere_area
from .weighted import RadiusField


@dataclass(frozen=True)
class ReducedResolution:
    """``n_theta`` latitude cells and ``per_unit`` nodes per unit of l.

    A dyadic annulus has l-width log 2, so node density per annulus is fixed
    across t. Inside the transition windows the density is raised by up to
    ``transition_boost`` with a Gaussian profile of l-width ``boost_width``.
    Beyond |xi| = ``wing_radius`` the xi-spacing is wing_radius / per_unit.
    """

    n_theta: int = 24
    per_unit: float = 12.0
    Y0: float = 0.5
    transition_boost: float = 4.0
    boost_width: float = 0.35
    wing_radius: float = 1.2

    def refined(self, factor=2):
        return ReducedResolution(int(round(self.n_theta * factor)), self.per_unit * factor, self.Y0,
                                 self.transition_boost, self.boost_width, self.wing_radius)


def _stretch(ell, centre, C, res):
    """sigma(l) and dsigma/dl for bumps at +-centre and wing scale C."""
    B, w = res.transition_boost - 1.0, res.boost_width
    sig = ell + 0.5 * B * w * np.sqrt(np.pi) * (erf((ell - centre) / w) + erf((ell + centre) / w)) + np.sinh(ell) / C
    dsig = 1.0 + B * (np.exp(-(((ell - centre) / w) ** 2)) + np.exp(-(((ell + centre) / w) ** 2))) + np.cosh(ell) / C
    return sig, dsig


def _unstretch(sigma, centre, C, res, lmax):
    """Invert the increasing map sigma(l) by bisection with a Newton polish."""
    lo = np.full(sigma.shape, -lmax)
    hi = np.full(sigma.shape, lmax)
    for _ in range(64):
        mid = 0.5 * (lo + hi)
        below = _stretch(mid, centre, C, res)[0] < sigma
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    ell = 0.5 * (lo + hi)
    for _ in range(2):
        g, dg = _stretch(ell, centre, C, res)
        ell = ell - (g - sigma) / dg
    return ell


@dataclass
class ReducedMesh:
    """Slice fields of the glued surface on a (theta, l) tensor grid.

    Node arrays are flat of length n_theta * n_l; ``a`` and ``b`` hold the
    (coordinate 1, coordinate m) components of dF/dtheta and dF/dl.
    """

    surface: object
    grid: Grid2D
    theta: np.ndarray
    ell: np.ndarray
    y: np.ndarray
    dy_ds: np.ndarray
    point: np.ndarray
    a: np.ndarray
    b: np.ndarray
    region: np.ndarray
    r_amb: np.ndarray
    rho: np.ndarray
    f: np.ndarray
    jt: np.ndarray
    df: np.ndarray
    djt: np.ndarray
    theta_f: np.ndarray
    residual: np.ndarray
    metric: np.ndarray
    metric_inv: np.ndarray
    orbit: np.ndarray
    omega: np.ndarray
    volume: np.ndarray
    orientation: float
    R_out: float
    bg: KahlerBackground
    _ops: dict = field(default_factory=dict, repr=False)

    @property
    def m(self):
        return self.surface.m

    @property
    def t(self):
        return self.surface.t

    @property
    def size(self):
        return self.grid.size

    @property
    def unknowns(self):
        return self.grid.unknowns

    def ops(self):
        """Cached sparse difference operators (E, R, D1 even, D1 odd, D2)."""
        if not self._ops:
            g = self.grid
            self._ops.update(E=g.extension(), R=g.restriction(), D1e=g.d1(1.0), D1o=g.d1(-1.0), D2=g.d2())
        return self._ops

    def node_theta(self):
        return np.repeat(self.theta, self.grid.n2)

    def slice_x(self):
        """Slice points of the neck sphere at every node."""
        return _slice_points(self.node_theta(), self.m)


def _slice_points(theta, m):
    x = np.zeros(theta.shape + (m,))
    x[..., 0] = np.sin(theta)
    x[..., -1] = np.cos(theta)
    return x


def _slice_basis(theta, m):
    """Tangent basis [d/dtheta, e_2, ..., e_{m-1}] of the sphere along the slice."""
    E = np.zeros(theta.shape + (m, m - 1))
    E[..., 0, 0] = np.cos(theta)
    E[..., -1, 0] = -np.sin(theta)
    for k in range(1, m - 1):
        E[..., k, k] = 1.0
    return E


def build_reduced_mesh(surface, resolution=ReducedResolution(), R_prime=None, R_out=3.0, symmetry_tol=1e-9):
    """Evaluate the glued surface on the reduced grid.

    A single truncation sphere |y| = R_out / t is used, so ``R_prime`` must
    equal ``R_out`` when given. Raises SymmetryRequired unless the motion is
    equal-angled and the soliton direction is -e_m up to scale.
    """
    if R_prime is not None and not np.isclose(R_prime, R_out):
        raise ConfigError("reduced mesh uses one truncation sphere; R_prime must equal R_out",
                          R_prime=R_prime, R_out=R_out)
    motion = surface.config.motions[surface.index]
    if not motion.is_equal_angle():
        raise SymmetryRequired("reduced solver needs phi_1 = ... = phi_{m-1}", phi=list(motion.phi))
    m = surface.m
    bg = surface.bg if surface.bg is not None else KahlerBackground(m)
    if np.any(np.abs(bg.T[:-1]) > 0):
        raise SymmetryRequired("soliton direction must be a multiple of e_m")
    r_trans = 2.0 * surface.t ** surface.tau
    if R_out <= r_trans:
        raise ConfigError("truncation radius must lie beyond the transition region", R_out=R_out)

    res = resolution
    if np.pi * R_out / res.n_theta > 2.0:
        raise ConfigError("angular spacing at the truncation sphere exceeds 2; raise n_theta",
                          R_out=R_out, n_theta=res.n_theta)
    n1 = res.n_theta
    h1 = np.pi / n1
    theta = (np.arange(n1) + 0.5) * h1
    lmax = np.arcsinh(R_out / (surface.t * res.Y0))
    centre = np.arcsinh(1.5 * surface.t ** (surface.tau - 1.0) / res.Y0)
    C = res.wing_radius / (surface.t * res.Y0)
    smax = _stretch(lmax, centre, C, res)[0]
    n2 = 2 * int(np.ceil(smax * res.per_unit)) + 1
    sigma = np.linspace(-smax, smax, n2)
    ell = _unstretch(sigma, centre, C, res, lmax)
    ell[0], ell[-1] = -lmax, lmax
    h2 = sigma[1] - sigma[0]
    grid = Grid2D(n1, n2, h1, h2, "axis")

    TH, L = np.meshgrid(theta, ell, indexing="ij")
    th, l = TH.ravel(), L.ravel()
    y = res.Y0 * np.sinh(l)
    dy = res.Y0 * np.cosh(l) / _stretch(l, centre, C, res)[1]
    x = _slice_points(th, m)
    basis = _slice_basis(th, m)
    gf = glued_eval(surface, x, y, basis)
    pt, jac = gf.point, gf.jacobian

    mid = slice(1, m - 1)
    scale = 1.0 + np.abs(pt).max()
    off = max(np.abs(pt[:, mid]).max(initial=0.0), np.abs(jac[:, mid, 0]).max(initial=0.0),
              np.abs(jac[:, mid, -1]).max(initial=0.0))
    if off > symmetry_tol * scale:
        raise SymmetryRequired("glued surface is not rotation invariant on the slice", deviation=float(off))
    c = pt[:, 0]
    for k in range(1, m - 1):
        orbit_col = c / np.sin(th)
        if np.abs(jac[:, k, k] - orbit_col).max() > symmetry_tol * scale:
            raise SymmetryRequired("orbit column mismatch on the slice", column=k)

    a = np.stack([jac[:, 0, 0], jac[:, -1, 0]], axis=-1)
    b = np.stack([jac[:, 0, -1], jac[:, -1, -1]], axis=-1) * dy[:, None]
    ab = np.real(np.sum(np.conj(a) * b, axis=-1))
    g = np.empty((th.size, 2, 2))
    g[:, 0, 0] = np.sum(np.abs(a) ** 2, axis=-1)
    g[:, 1, 1] = np.sum(np.abs(b) ** 2, axis=-1)
    g[:, 0, 1] = g[:, 1, 0] = ab
    detg = g[:, 0, 0] * g[:, 1, 1] - ab**2
    ginv = np.empty_like(g)
    ginv[:, 0, 0] = g[:, 1, 1] / detg
    ginv[:, 1, 1] = g[:, 0, 0] / detg
    ginv[:, 0, 1] = ginv[:, 1, 0] = -ab / detg

    # orientation of [x, d/dtheta, e_2, ...] in R^m, a constant sign
    orient = float(np.sign(np.linalg.det(np.concatenate([x[:1, :, None], basis[:1]], axis=-1))[0]))
    orbit = np.abs(c) ** (m - 2)
    omega = orbit * np.sqrt(detg)
    volume = omega * h1 * h2 * sphere_area(m - 1)

    Tm = bg.T[-1]
    fm = pt[:, -1]
    f = 2.0 * np.real(np.conj(fm) * Tm)
    jt = np.real(np.conj(fm) * 1j * Tm)
    df = np.stack([2.0 * np.real(np.conj(a[:, 1]) * Tm), 2.0 * np.real(np.conj(b[:, 1]) * Tm)], axis=-1)
    djt = np.stack([np.real(np.conj(a[:, 1]) * 1j * Tm), np.real(np.conj(b[:, 1]) * 1j * Tm)], axis=-1)
    det = orient * c ** (m - 2) * (a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0])
    theta_f = np.angle(det * np.exp(-1j * jt - 1j * bg.phase_ref))
    residual = _theta(c, fm, a, b, m, orient, bg)

    rho = RadiusField(surface.t, surface.R_hat, surface.eps)(gf.r_amb)
    return ReducedMesh(surface, grid, theta, ell, y, dy, pt, a, b, gf.region, gf.r_amb, rho, f, jt, df, djt,
                       theta_f, residual, g, ginv, orbit, omega, volume, orient, R_out, bg)


def _theta(c, fm, a, b, m, orient, bg):
    """Translator residual on the slice from the (1, m) components."""
    Tm = bg.T[-1]
    f = 2.0 * np.real(np.conj(fm) * Tm)
    jt = np.real(np.conj(fm) * 1j * Tm)
    det = orient * c ** (m - 2) * (a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0])
    aa = np.sum(np.abs(a) ** 2, axis=-1)
    bb = np.sum(np.abs(b) ** 2, axis=-1)
    ab = np.real(np.sum(np.conj(a) * b, axis=-1))
    vol = np.abs(c) ** (m - 2) * np.sqrt(aa * bb - ab**2)
    return np.imag(np.exp(-1j * bg.phase_ref) * det * np.exp(-0.5 * f - 1j * jt)) / vol


def _defect(a, b):
    """omega(a, b) / sqrt(det g2); the orbit columns pair trivially."""
    w = np.imag(np.sum(np.conj(a) * b, axis=-1))
    aa = np.sum(np.abs(a) ** 2, axis=-1)
    bb = np.sum(np.abs(b) ** 2, axis=-1)
    ab = np.real(np.sum(np.conj(a) * b, axis=-1))
    return np.abs(w) / np.sqrt(aa * bb - ab**2)


@dataclass(frozen=True)
class PerturbationMaps:
    """Sparse maps from unknowns to the increments of (c, F_m, a, b) at unknown nodes."""

    grad: tuple
    dc: sp.spmatrix
    dfm: sp.spmatrix
    da: tuple
    db: tuple


def perturbation_maps(mesh):
    """u -> V = J dF g^{-1} grad u and its differences, as complex sparse matrices."""
    if "maps" in mesh._ops:
        return mesh._ops["maps"]
    o = mesh.ops()
    E, R = o["E"], o["R"]
    Ut = o["D1e"] @ E
    Ul = o["D2"] @ E
    gi = mesh.metric_inv
    wt = sp.diags(gi[:, 0, 0]) @ Ut + sp.diags(gi[:, 0, 1]) @ Ul
    wl = sp.diags(gi[:, 1, 0]) @ Ut + sp.diags(gi[:, 1, 1]) @ Ul
    V = [(sp.diags(1j * mesh.a[:, k]) @ wt + sp.diags(1j * mesh.b[:, k]) @ wl).tocsr() for k in range(2)]
    maps = PerturbationMaps(
        grad=(Ut.tocsr(), Ul.tocsr()),
        dc=(R @ V[0]).tocsr(),
        dfm=(R @ V[1]).tocsr(),
        da=((R @ o["D1o"] @ V[0]).tocsr(), (R @ o["D1e"] @ V[1]).tocsr()),
        db=((R @ o["D2"] @ V[0]).tocsr(), (R @ o["D2"] @ V[1]).tocsr()),
    )
    mesh._ops["maps"] = maps
    return maps


def gradient_norm(mesh, u):
    """|grad u|_g at all nodes for a field on the unknowns."""
    mp = perturbation_maps(mesh)
    ut, ul = mp.grad[0] @ u, mp.grad[1] @ u
    gi = mesh.metric_inv
    q = gi[:, 0, 0] * ut**2 + 2 * gi[:, 0, 1] * ut * ul + gi[:, 1, 1] * ul**2
    return np.sqrt(np.maximum(q, 0.0))


@dataclass(frozen=True)
class PerturbedTheta:
    theta: np.ndarray
    defect: np.ndarray
    max_grad: float
    chart_ratio: float


def chart_ratio(mesh, u):
    """max |grad u| / rho over the nodes, the scale-invariant chart size of u."""
    return float(np.max(gradient_norm(mesh, u) / mesh.rho, initial=0.0))


def chart_bound(mesh, factor=0.1):
    """Pointwise gradient bound factor * rho at every node."""
    return factor * mesh.rho


def perturbed_theta(mesh, u, chart_factor=0.1, check=True):
    """Residual and defect of F_u = F + J dF(grad u) at the unknown nodes.

    The chart is accepted while |grad u| <= chart_factor * rho at every node.
    """
    u = np.asarray(u, float)
    grad = gradient_norm(mesh, u)
    gmax = float(grad.max(initial=0.0))
    ratio = float(np.max(grad / mesh.rho, initial=0.0))
    if check and ratio > chart_factor:
        raise ChartOverflow("perturbation gradient exceeds the chart bound", ratio=ratio, factor=chart_factor)
    mp = perturbation_maps(mesh)
    k = mesh.unknowns
    c = mesh.point[k, 0] + mp.dc @ u
    fm = mesh.point[k, -1] + mp.dfm @ u
    a = mesh.a[k] + np.stack([mp.da[0] @ u, mp.da[1] @ u], axis=-1)
    b = mesh.b[k] + np.stack([mp.db[0] @ u, mp.db[1] @ u], axis=-1)
    return PerturbedTheta(_theta(c, fm, a, b, mesh.m, mesh.orientation, mesh.bg), _defect(a, b), gmax, ratio)


def _theta_derivative(mesh, k, dc, dfm, da, db):
    """Directional derivative of the slice residual at the base, for increment arrays."""
    m, bg = mesh.m, mesh.bg
    Tm = bg.T[-1]
    c, fm, a, b = mesh.point[k, 0], mesh.point[k, -1], mesh.a[k], mesh.b[k]
    n = m - 2
    delta = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
    f = 2.0 * np.real(np.conj(fm) * Tm)
    jt = np.real(np.conj(fm) * 1j * Tm)
    G = np.exp(-1j * bg.phase_ref) * mesh.orientation * c**n * delta * np.exp(-0.5 * f - 1j * jt)
    ddelta = da[:, 0] * b[:, 1] + a[:, 0] * db[:, 1] - da[:, 1] * b[:, 0] - a[:, 1] * db[:, 0]
    dfv = 2.0 * np.real(np.conj(dfm) * Tm)
    djt = np.real(np.conj(dfm) * 1j * Tm)
    dG = G * (n * dc / c + ddelta / delta - 0.5 * dfv - 1j * djt)
    inner = lambda x, z: np.real(np.sum(np.conj(x) * z, axis=-1))
    aa, bb, ab = inner(a, a), inner(b, b), inner(a, b)
    D2 = aa * bb - ab**2
    dD2 = 2 * inner(a, da) * bb + 2 * aa * inner(b, db) - 2 * ab * (inner(da, b) + inner(a, db))
    S = np.abs(c) ** n * np.sqrt(D2)
    dS = n * np.real(np.conj(c) * dc) / np.abs(c) ** 2 + 0.5 * dD2 / D2
    return np.imag(dG) / S - np.imag(G) / S * dS


def linearization(mesh):
    """Exact Jacobian of the discrete residual map at u = 0 (sparse, unknowns x unknowns)."""
    if "jac" in mesh._ops:
        return mesh._ops["jac"]
    mp = perturbation_maps(mesh)
    k = mesh.unknowns
    z = np.zeros(k.size, complex)
    z2 = np.zeros((k.size, 2), complex)
    slots = [("dc", mp.dc), ("dfm", mp.dfm), ("da0", mp.da[0]), ("da1", mp.da[1]), ("db0", mp.db[0]),
             ("db1", mp.db[1])]
    J = None
    for name, B in slots:
        coef = []
        for unit in (1.0, 1j):
            args = dict(dc=z, dfm=z, da=z2.copy(), db=z2.copy())
            if name in ("dc", "dfm"):
                args[name] = np.full(k.size, unit)
            else:
                args[name[:2]][:, int(name[2])] = unit
            coef.append(_theta_derivative(mesh, k, **args))
        kappa = coef[0] - 1j * coef[1]
        term = (sp.diags(kappa) @ B).real
        J = term if J is None else J + term
    J = J.tocsr()
    J.eliminate_zeros()
    mesh._ops["jac"] = J
    return J
