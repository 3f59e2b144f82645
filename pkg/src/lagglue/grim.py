"""Grim Reaper cylinders, the rigid motions P_(phi, lambda) and their intersections."""
import json
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .ambient import FrameData, principal_angles
from .errors import AngleConditionViolated, NoIntersection, OutOfDomain

ADMISSIBLE_TOL = 1e-12


def gamma0(x):
    """Grim Reaper curve of phase 0: -log cos x - i (x - pi/2)."""
    return -np.log(np.cos(x)) - 1j * (x - 0.5 * np.pi)


def gudermannian(s):
    return 2.0 * np.arctan(np.exp(s)) - 0.5 * np.pi


def inverse_gudermannian(x):
    return np.arcsinh(np.tan(x))


def _curve(xm, parametrization):
    """Curve value with first and second derivatives in the chosen parameter."""
    if parametrization == "angle":
        if np.any(np.abs(xm) >= 0.5 * np.pi):
            raise OutOfDomain("angle parameter outside (-pi/2, pi/2)")
        c = np.cos(xm)
        return gamma0(xm), np.tan(xm) - 1j, 1.0 / c**2 + 0j
    if parametrization == "arclength":
        s = np.asarray(xm, float)
        sech, th = 1.0 / np.cosh(s), np.tanh(s)
        # log cosh s without overflow
        lc = np.abs(s) + np.log1p(np.exp(-2 * np.abs(s))) - np.log(2.0)
        val = lc - 1j * (gudermannian(s) - 0.5 * np.pi)
        return val, th - 1j * sech, sech**2 + 1j * sech * th
    raise ValueError(f"unknown parametrization {parametrization!r}")


@dataclass(frozen=True)
class RigidMotionSpec:
    """The affine map P_(phi, lambda)(z) = (e^{i phi_j} z_j, z_m + lambda + i phi_m)."""

    phi: Tuple[float, ...]
    lam: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "phi", tuple(float(p) for p in self.phi))

    @property
    def m(self):
        return len(self.phi)

    @property
    def admissible(self):
        p = np.array(self.phi)
        return bool(abs(p.sum() - np.pi) < ADMISSIBLE_TOL and np.all((p > 0) & (p < np.pi)))

    @property
    def rotation(self):
        """Diagonal of the unitary part; the last coordinate is only translated."""
        d = np.exp(1j * np.array(self.phi))
        d[-1] = 1.0
        return d

    @property
    def shift(self):
        out = np.zeros(self.m, complex)
        out[-1] = self.lam + 1j * self.phi[-1]
        return out

    def is_equal_angle(self, tol=1e-12):
        p = np.array(self.phi[:-1])
        return bool(np.all(np.abs(p - p[0]) < tol))


def apply_motion(spec, z):
    """Apply P_(phi, lambda) to points ``z`` of shape (..., m)."""
    z = np.asarray(z, complex)
    return z * spec.rotation + spec.shift


@dataclass(frozen=True)
class AffineMap:
    """z -> rot * z + shift with diagonal unitary ``rot``; compositions of motions."""

    rot: np.ndarray
    shift: np.ndarray

    @classmethod
    def identity(cls, m):
        return cls(np.ones(m, complex), np.zeros(m, complex))

    @classmethod
    def from_motion(cls, spec):
        return cls(spec.rotation, spec.shift)

    def __call__(self, z):
        return np.asarray(z, complex) * self.rot + self.shift

    def compose(self, inner):
        """self o inner."""
        return AffineMap(self.rot * inner.rot, self.rot * inner.shift + self.shift)

    def inverse(self):
        return AffineMap(np.conj(self.rot), -np.conj(self.rot) * self.shift)


@dataclass(frozen=True)
class GrimChart:
    """A Grim Reaper cylinder, possibly moved by an affine map."""

    m: int
    placement: Optional[AffineMap] = None
    parametrization: str = "angle"

    def __post_init__(self):
        if self.placement is None:
            object.__setattr__(self, "placement", AffineMap.identity(self.m))

    def moved(self, spec):
        return GrimChart(self.m, AffineMap.from_motion(spec).compose(self.placement), self.parametrization)


def chart_eval(chart, params):
    """Point, analytic jacobian and hessian of a Grim Reaper chart.

    ``params`` has shape (..., m); the last entry is the curve parameter
    (angle x_m in (-pi/2, pi/2) or arclength s).
    """
    params = np.asarray(params, float)
    m = chart.m
    val, d1, d2 = _curve(params[..., -1], chart.parametrization)
    pt = params.astype(complex)
    pt[..., -1] = val
    batch = params.shape[:-1]
    jac = np.zeros(batch + (m, m), complex)
    idx = np.arange(m - 1)
    jac[..., idx, idx] = 1.0
    jac[..., -1, -1] = d1
    hess = np.zeros(batch + (m, m, m), complex)
    hess[..., -1, -1, -1] = d2
    rot = chart.placement.rot
    pt = chart.placement(pt)
    jac = rot[:, None] * jac
    hess = hess * rot[None, None, :]
    return FrameData(pt, jac, hess)


@dataclass(frozen=True)
class IntersectionRecord:
    point: np.ndarray
    s0: float
    s1: float
    cone_angles: np.ndarray
    rate: int = 3
    charts: Tuple[int, int] = (0, 1)

    def to_dict(self):
        return {
            "point_re": np.real(self.point).tolist(),
            "point_im": np.imag(self.point).tolist(),
            "s0": self.s0,
            "s1": self.s1,
            "cone_angles": list(map(float, self.cone_angles)),
            "rate": self.rate,
            "charts": list(self.charts),
        }


def _root_function(s, phi_m, lam):
    return np.log(np.cos(s + phi_m)) - np.log(np.cos(s)) - lam


def solve_s0(phi_m, lam, width=1e-10, newton_steps=5):
    """Root of log cos(s + phi_m) - log cos(s) = lambda on (-pi/2, pi/2 - phi_m).

    The function is strictly decreasing there, so bisection on the
    bracket is followed by a few Newton polishing steps.
    """
    if not 0.0 < phi_m < np.pi:
        raise NoIntersection("phi_m must lie in (0, pi)", phi_m=phi_m)
    lo, hi = -0.5 * np.pi, 0.5 * np.pi - phi_m
    delta = 1e-15 * max(1.0, abs(hi - lo))
    a, b = lo + delta, hi - delta
    with np.errstate(divide="ignore"):
        fa, fb = _root_function(a, phi_m, lam), _root_function(b, phi_m, lam)
    if not (fa > 0 > fb):
        raise NoIntersection("no sign change on the bracket", phi_m=phi_m, lam=lam)
    while b - a > width:
        c = 0.5 * (a + b)
        if _root_function(c, phi_m, lam) > 0:
            a = c
        else:
            b = c
    s = 0.5 * (a + b)
    for _ in range(newton_steps):
        fs = _root_function(s, phi_m, lam)
        ds = -np.tan(s + phi_m) + np.tan(s)
        step = fs / ds
        if not a - width <= s - step <= b + width:
            break
        s -= step
        if abs(step) < 1e-16:
            break
    return float(s)


def tangent_plane(chart, params):
    return chart_eval(chart, params).jacobian


def intersect(spec):
    """Intersection of L_0 with P_(phi, lambda)(L_0) at (0, ..., 0, s0)."""
    m = spec.m
    s0 = solve_s0(spec.phi[-1], spec.lam)
    s1 = s0 + spec.phi[-1]
    base, moved = GrimChart(m), GrimChart(m).moved(spec)
    x0 = np.zeros(m)
    x0[-1] = s0
    x1 = np.zeros(m)
    x1[-1] = s1
    point = chart_eval(base, x0).point
    angles = principal_angles(tangent_plane(base, x0), tangent_plane(moved, x1))
    return IntersectionRecord(point, s0, s1, angles)


def _relative_intersection(rel, m):
    """Intersection of L_0 with rel(L_0) for a diagonal unitary + shift ``rel``.

    Returns (kind, s, s') where kind is 'none', 'point' or 'degenerate'.
    """
    c = rel.shift[-1]
    rot_angles = np.angle(rel.rot[:-1])
    rotated_last = abs(np.angle(rel.rot[-1])) > 1e-12
    if rotated_last or np.any(np.abs(rel.shift[:-1]) > 1e-12):
        return "degenerate", None, None
    b = np.imag(c)
    if abs(b) >= np.pi:
        return "none", None, None
    if abs(b) < 1e-14:
        return ("degenerate" if abs(np.real(c)) < 1e-14 else "none"), None, None
    if np.any(np.abs(np.sin(rot_angles)) < 1e-12):
        return "degenerate", None, None
    # gamma0(s) = gamma0(s') + c forces s' = s + b and log cos(s + b) - log cos s = Re c
    if b > 0:
        s = solve_s0(b, np.real(c))
        return "point", s, s + b
    sp = solve_s0(-b, -np.real(c))
    return "point", sp - b, sp


@dataclass
class CsConfiguration:
    m: int
    motions: List[RigidMotionSpec]
    charts: List[GrimChart]
    placements: List[AffineMap]
    records: List[IntersectionRecord] = field(default_factory=list)
    extra_intersections: List[dict] = field(default_factory=list)

    def f_upper_bounds(self):
        """sup of f = 2<F, T> over each chart (T = -e_m): -2 Re(shift_m)."""
        return [float(-2.0 * np.real(pl.shift[-1])) for pl in self.placements]

    def t_finite(self):
        return all(np.isfinite(self.f_upper_bounds()))


def build_configuration(motions, m=None, parametrization="angle"):
    """Compose motions into charts Q_k(L_0) and record their intersections.

    Consecutive charts meet at Q_{k-1}(p_k); every other pair is checked
    analytically and reported in ``extra_intersections``.
    """
    motions = list(motions)
    if m is None:
        if not motions:
            raise ValueError("dimension required for an empty configuration")
        m = motions[0].m
    for k, spec in enumerate(motions):
        if spec.m != m:
            raise ValueError("all motions must share the dimension m")
        if not spec.admissible:
            raise AngleConditionViolated("motion violates sum(phi) = pi", index=k, total=float(np.sum(spec.phi)))
    placements = [AffineMap.identity(m)]
    for spec in motions:
        placements.append(placements[-1].compose(AffineMap.from_motion(spec)))
    charts = [GrimChart(m, pl, parametrization) for pl in placements]
    records = []
    for k, spec in enumerate(motions):
        rec = intersect(spec)
        q = placements[k]
        records.append(IntersectionRecord(q(rec.point), rec.s0, rec.s1, rec.cone_angles, rec.rate, (k, k + 1)))
    extras = []
    for i in range(len(placements)):
        for j in range(i + 2, len(placements)):
            rel = placements[i].inverse().compose(placements[j])
            kind, s, sp = _relative_intersection(rel, m)
            if kind != "none":
                entry = {"charts": [i, j], "kind": kind}
                if kind == "point":
                    x = np.zeros(m)
                    x[-1] = s
                    entry["point"] = placements[i](chart_eval(GrimChart(m), x).point)
                extras.append(entry)
    return CsConfiguration(m, motions, charts, placements, records, extras)


def load_configuration(path_or_dict):
    """Read {"m": .., "motions": [{"phi": [...], "lambda": x}], "parametrization": ..}."""
    if isinstance(path_or_dict, dict):
        doc = path_or_dict
    else:
        with open(path_or_dict) as fh:
            doc = json.load(fh)
    motions = [RigidMotionSpec(tuple(mo["phi"]), float(mo.get("lambda", 0.0))) for mo in doc.get("motions", [])]
    return build_configuration(motions, doc.get("m"), doc.get("parametrization", "angle"))
