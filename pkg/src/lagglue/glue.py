"""The glued approximate translator: wings, transition annulus and scaled Lawlor neck.

The whole surface is parametrized by (x, y) in S^{m-1} x R through the
neck coordinates. For y <= 0 the point is read on the side of L_0, for
y > 0 on the side of the moved cylinder; on each side
xi + i eta = D^{-1} t N(x, y) gives the cone coordinate xi (|xi| = r)
and the neck graph gradient eta. Then

    r <= t^tau          : F = p + U_0 t N                        (neck)
    t^tau < r < 2 t^tau : F = p + U_side (xi + i grad w_t(xi))   (transition)
    r >= 2 t^tau        : F = wing chart at (xi', S(xi_m))       (wing)

with w_t = eta_cut u + (1 - eta_cut) v_t. Every piece is exactly
Lagrangian and the pieces agree to all orders across the seams.
"""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .ambient import FrameData, KahlerBackground, induced_metric, translator_residual
from .cone import ConeChart, CutoffSpec, WingGraph, cutoff_eval, smooth_step
from .errors import OutOfDomain
from .grim import CsConfiguration, GrimChart, chart_eval
from .lawlor import NeckProfile, graph_potential, neck_eval, params_for_angles, psi_profile, sphere_basis

NECK_CORE, INNER_ANNULUS, TRANSITION, WING = 1, 2, 3, 4
REGION_NAMES = {NECK_CORE: "I", INNER_ANNULUS: "II", TRANSITION: "III", WING: "wing"}


@dataclass
class GluedSurface:
    config: CsConfiguration
    neck: NeckProfile
    t: float
    cutoff: CutoffSpec
    eps: float = 0.5
    R_hat: float = 0.6
    index: int = 0
    bg: Optional[KahlerBackground] = None
    cone: ConeChart = field(init=False)
    wings: tuple = field(init=False)
    phi: np.ndarray = field(init=False)
    charts: tuple = field(init=False)

    def __post_init__(self):
        m = self.config.m
        if self.bg is None:
            self.bg = KahlerBackground(m)
        rec = self.config.records[self.index]
        spec = self.config.motions[self.index]
        base = ConeChart.from_record(rec, spec.phi)
        self.phi = np.array(spec.phi)
        rot = self.config.placements[self.index].rot
        self.cone = ConeChart(rec.point, base.U0 * rot, base.D)
        self.wings = (WingGraph(rec.s0), WingGraph(rec.s1))
        self.charts = tuple(
            GrimChart(m, self.config.placements[self.index + k], "arclength") for k in (0, 1)
        )
        b = self.boundaries
        if not 0 < b["t_R_hat"] < b["t_tau"] < b["2t_tau"] < self.eps:
            raise OutOfDomain("region ordering 0 < t R_hat < t^tau < 2 t^tau < eps violated", **b)
        for wg in self.wings:
            if not (wg.xi_lo < -self.eps and wg.xi_hi > self.eps):
                raise OutOfDomain("eps exceeds the graph regime of a wing", xi_lo=wg.xi_lo, xi_hi=wg.xi_hi)

    @property
    def m(self):
        return self.config.m

    @property
    def tau(self):
        return self.cutoff.tau

    @property
    def boundaries(self):
        t, tau = self.t, self.cutoff.tau
        return {"t_R_hat": t * self.R_hat, "t_tau": t**tau, "2t_tau": 2 * t**tau, "eps": self.eps}

    def with_t(self, t):
        return GluedSurface(self.config, self.neck, t, self.cutoff, self.eps, self.R_hat, self.index, self.bg)

    @property
    def vertex(self):
        return self.cone.vertex


def build_glued_surface(config, t, tau=0.9, eps=0.5, R_hat=0.6, a_min=4.0, profile=None, index=0,
                        profile_kwargs=None):
    """Assemble the glued surface for the singularity ``index`` of ``config``.

    The neck angles are the motion angles; the neck is normalised by
    min a_j = a_min (waist inside the ball of radius a_min^{-1/2}).
    """
    if profile is None:
        params = params_for_angles(config.motions[index].phi, a_min=a_min)
        profile = psi_profile(params, **(profile_kwargs or {}))
    return GluedSurface(config, profile, t, CutoffSpec(tau), eps, R_hat, index)


@dataclass(frozen=True)
class GluedFrame:
    frame: FrameData
    region: np.ndarray
    side: np.ndarray
    r: np.ndarray
    r_amb: np.ndarray

    @property
    def point(self):
        return self.frame.point

    @property
    def jacobian(self):
        return self.frame.jacobian


def _cone_coordinates(surface, x, y, basis):
    """Neck frame and the side-wise graph data xi, eta and their parameter jacobians."""
    fr = neck_eval(surface.neck, x, y, 1.0, basis)
    side = (np.asarray(y) > 0).astype(int)
    D = np.where(side[..., None] == 1, surface.cone.D, 1.0)
    w = fr.point / D
    dw = fr.jacobian / D[..., :, None]
    t = surface.t
    return fr, side, t * w.real, t * w.imag, t * dw.real, t * dw.imag


def _plane(surface, side):
    return np.where(side[..., None] == 1, surface.cone.plane(1), surface.cone.plane(0))


def _eval_neck(surface, fr):
    U0 = surface.cone.U0
    return surface.vertex + U0 * surface.t * fr.point, U0[:, None] * surface.t * fr.jacobian


def _wing_potential(surface, side, xi_m):
    x = np.empty_like(xi_m)
    h, dh, H = np.empty_like(xi_m), np.empty_like(xi_m), np.empty_like(xi_m)
    for k in (0, 1):
        sel = side == k
        if sel.any():
            x[sel], h[sel], dh[sel], H[sel] = surface.wings[k].derivatives(xi_m[sel])
    return h, dh, H


def transition_data(surface, x, y, side, xi, eta, dxi, deta):
    """grad w_t and Hess w_t in cone coordinates, plus the cutoff value."""
    m = surface.m
    t = surface.t
    r = np.linalg.norm(xi, axis=-1)
    h, dh, H = _wing_potential(surface, side, xi[..., -1])
    chi, c1, c2 = cutoff_eval(surface.cutoff, t, r)
    v = np.empty_like(r)
    for k in (0, 1):
        sel = side == k
        if sel.any():
            v[sel] = t**2 * graph_potential(surface.neck, x[sel], y[sel], surface.phi if k else None)
    grad_u = np.zeros_like(xi)
    grad_u[..., -1] = h
    hess_u = np.zeros(xi.shape + (m,))
    hess_u[..., -1, -1] = dh
    hess_v = deta @ np.linalg.inv(dxi)
    hess_v = 0.5 * (hess_v + np.swapaxes(hess_v, -1, -2))
    n = xi / r[..., None]
    grad_chi = c1[..., None] * n
    nn = n[..., :, None] * n[..., None, :]
    hess_chi = c2[..., None, None] * nn + (c1 / r)[..., None, None] * (np.eye(m) - nn)
    du = grad_u - eta
    diff = (H - v)[..., None]
    grad_w = chi[..., None] * grad_u + (1 - chi[..., None]) * eta + diff * grad_chi
    outer = du[..., :, None] * grad_chi[..., None, :]
    hess_w = (chi[..., None, None] * hess_u + (1 - chi[..., None, None]) * hess_v
              + outer + np.swapaxes(outer, -1, -2) + diff[..., None] * hess_chi)
    return grad_w, hess_w, chi


def _eval_transition(surface, x, y, side, xi, eta, dxi, deta):
    grad_w, hess_w, _ = transition_data(surface, x, y, side, xi, eta, dxi, deta)
    U = _plane(surface, side)
    pt = surface.vertex + U * (xi + 1j * grad_w)
    m = surface.m
    jac = U[..., :, None] * ((np.eye(m) + 1j * hess_w) @ dxi)
    return pt, jac


def _eval_wing(surface, side, xi, dxi):
    m = surface.m
    pt = np.empty(xi.shape, complex)
    jac = np.empty(xi.shape + (m,), complex)
    for k in (0, 1):
        sel = side == k
        if not sel.any():
            continue
        S, dS = surface.wings[k].arclength_blend(xi[sel][..., -1], surface.eps)
        par = xi[sel].copy()
        par[..., -1] = S
        fr = chart_eval(surface.charts[k], par)
        scale = np.ones(par.shape)
        scale[..., -1] = dS
        pt[sel] = fr.point
        jac[sel] = (fr.jacobian * scale[..., None, :]) @ dxi[sel]
    return pt, jac


def glued_eval(surface, x, y, basis=None):
    """Frame of the glued immersion at (x, y) with region tags.

    ``basis`` is an orthonormal tangent basis of the sphere at x (default
    :func:`sphere_basis`); jacobian columns follow it and then d/dy.
    """
    x = np.atleast_2d(np.asarray(x, float))
    y = np.atleast_1d(np.asarray(y, float))
    if basis is None:
        basis = sphere_basis(x)
    fr, side, xi, eta, dxi, deta = _cone_coordinates(surface, x, y, basis)
    r = np.linalg.norm(xi, axis=-1)
    b = surface.boundaries
    m = surface.m
    pt = np.empty(x.shape, complex)
    jac = np.empty(x.shape + (m,), complex)
    neck = r <= b["t_tau"]
    wing = r >= b["2t_tau"]
    trans = ~neck & ~wing
    if neck.any():
        pt[neck], jac[neck] = _eval_neck(surface, fr[neck])
    if trans.any():
        pt[trans], jac[trans] = _eval_transition(surface, x[trans], y[trans], side[trans], xi[trans],
                                                 eta[trans], dxi[trans], deta[trans])
    if wing.any():
        pt[wing], jac[wing] = _eval_wing(surface, side[wing], xi[wing], dxi[wing])
    r_amb = np.linalg.norm(pt - surface.vertex, axis=-1)
    region = np.full(r.shape, WING)
    region[trans] = TRANSITION
    region[neck] = np.where(r_amb[neck] <= b["t_R_hat"], NECK_CORE, INNER_ANNULUS)
    return GluedFrame(FrameData(pt, jac), region, side, r, r_amb)


def glued_residual(surface, x, y, basis=None):
    gf = glued_eval(surface, x, y, basis)
    return translator_residual(gf.point, gf.jacobian, surface.bg), gf


def metric_deviation(surface, x, y, basis=None):
    """|g_t - g_C|_{g_C} on the transition annulus (Frobenius norm of Hess w^2)."""
    x = np.atleast_2d(np.asarray(x, float))
    y = np.atleast_1d(np.asarray(y, float))
    if basis is None:
        basis = sphere_basis(x)
    _, side, xi, eta, dxi, deta = _cone_coordinates(surface, x, y, basis)
    _, hess_w, _ = transition_data(surface, x, y, side, xi, eta, dxi, deta)
    return np.linalg.norm(hess_w @ hess_w, axis=(-2, -1))
