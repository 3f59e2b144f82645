"""Perturbation of the glued surface: Picard iteration and quadratic-remainder checks.

Fields live on the unknown nodes of a reduced mesh. Norms are discrete p = 2
versions of W^{k,2}_{beta,gamma,t} with quadrature weights rho^{-m} dV.
Derivatives of order two and three are coordinate differences contracted
with the 2D metric, without connection terms, so the W^{3,2} norm is an
approximate diagnostic.
"""
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse.linalg as sla

from .errors import IterationDiverged
from .operator import assemble_L
from .reduced import chart_ratio, gradient_norm, linearization, perturbed_theta
from .weighted import WeightSpec, fit_slope, predicted_exponent


def _weight(mesh, spec):
    k = mesh.unknowns
    rho = mesh.rho[k]
    w = np.exp(0.5 * spec.beta * mesh.f[k]) * rho ** (-spec.gamma)
    return w, rho, rho ** (-mesh.m) * mesh.volume[k]


def _frame(mesh):
    """Per-node 2x2 matrix e with e^T g e = I, mapping coordinate to orthonormal components."""
    g = mesh.metric[mesh.unknowns]
    w, v = np.linalg.eigh(g)
    return np.einsum("nij,nj,nkj->nik", v, w**-0.5, v)


def derivative_norms(mesh, u, order=1):
    """|grad^j u| for j = 1..order at the unknown nodes (coordinate differences)."""
    o = mesh.ops()
    E, R = o["E"], o["R"]
    D = [o["D1e"], o["D2"]]
    e = _frame(mesh)
    full = E @ np.asarray(u, float)
    out = []
    layer = {(): full}
    for j in range(1, order + 1):
        layer = {key + (a,): D[a] @ val for key, val in layer.items() for a in range(2)}
        T = np.empty((mesh.unknowns.size,) + (2,) * j)
        for key, val in layer.items():
            T[(slice(None),) + key] = R @ val
        for _ in range(j):
            T = np.einsum("nia,na...->n...i", e, T)
        out.append(np.sqrt(np.sum(T.reshape(T.shape[0], -1) ** 2, axis=1)))
    return out


def sobolev_norm(mesh, u, spec):
    """Discrete ||u||_{W^{k,2}_{beta,gamma,t}} of a field on the unknowns."""
    w, rho, dv = _weight(mesh, spec)
    u = np.asarray(u, float)
    dens = (w * u) ** 2
    if spec.k >= 1:
        if spec.k == 1:
            grads = [gradient_norm(mesh, u)[mesh.unknowns]]
        else:
            grads = derivative_norms(mesh, u, spec.k)
        for j, gj in enumerate(grads, start=1):
            dens = dens + (w * rho**j * gj) ** 2
    return float(np.sqrt(np.sum(dens * dv)))


def residual_norm(mesh, theta, spec=WeightSpec()):
    """||Theta||_{L^2_{beta+1,gamma-2}} on the unknowns."""
    return sobolev_norm(mesh, theta, WeightSpec(0, 2.0, spec.beta + 1.0, spec.gamma - 2.0))


def random_field(mesh, rng, modes=6, amplitude=0.5, chart_factor=0.1):
    """Smooth even-in-theta field vanishing at the truncation, scaled to a fraction of the chart bound."""
    k = mesh.unknowns
    th = mesh.node_theta()[k]
    j = k % mesh.grid.n2
    s = j / (mesh.grid.n2 - 1)
    u = np.zeros(k.size)
    for p in range(modes):
        for q in range(1, modes + 1):
            u += rng.standard_normal() / (1.0 + p * p + q * q) * np.cos(p * th) * np.sin(q * np.pi * s)
    return u * amplitude * chart_factor / chart_ratio(mesh, u)


@dataclass
class PicardHistory:
    residual: list = field(default_factory=list)
    defect: list = field(default_factory=list)
    max_grad: list = field(default_factory=list)
    ball_norm: list = field(default_factory=list)
    converged: bool = False
    reason: str = ""
    u: np.ndarray = None

    @property
    def reduction(self):
        return self.residual[0] / self.residual[-1] if self.residual[-1] > 0 else np.inf

    def rows(self):
        return [dict(iteration=i, residual=r, defect=d, max_grad=g, ball_norm=b)
                for i, (r, d, g, b) in enumerate(zip(self.residual, self.defect, self.max_grad, self.ball_norm))]


def _linear_solver(mesh, linear, spec):
    L = linearization(mesh) if linear == "exact" else assemble_L(mesh, spec).L
    return sla.splu(L.tocsc())


def picard_iterate(mesh, spec=WeightSpec(), max_iter=5, tol=1e-2, floor=0.0, linear="exact",
                   relinearize=False, chart_factor=0.1, ball_spec=None):
    """u_{k+1} = u_k - L^{-1} Theta(u_k) with L frozen at u = 0.

    Stops when the weighted residual drops below ``tol`` times the initial one
    or below ``floor``. ``linear`` selects the exact discrete Jacobian or the
    finite-volume operator; ``relinearize`` switches to Newton steps using the
    finite-difference Jacobian at the current iterate (comparison only).
    """
    ball_spec = ball_spec or WeightSpec(3, 2.0, spec.beta, spec.gamma)
    lu = _linear_solver(mesh, linear, spec)
    u = np.zeros(mesh.unknowns.size)
    hist = PicardHistory()

    def record(pt, u):
        hist.residual.append(residual_norm(mesh, pt.theta, spec))
        hist.defect.append(float(pt.defect.max()))
        hist.max_grad.append(pt.max_grad)
        hist.ball_norm.append(sobolev_norm(mesh, u, ball_spec))

    pt = perturbed_theta(mesh, u, chart_factor)
    record(pt, u)
    growth = 0
    for it in range(max_iter + 1):
        r = hist.residual[-1]
        if r == 0.0 or r <= tol * hist.residual[0] or r <= floor:
            hist.converged = True
            hist.reason = "exact" if r == 0.0 else ("floor" if r <= floor else "tolerance")
            break
        if it == max_iter:
            hist.reason = "max_iter"
            break
        if relinearize and it > 0:
            lu = sla.splu(_fd_jacobian(mesh, u, chart_factor).tocsc())
        u = u - lu.solve(pt.theta)
        pt = perturbed_theta(mesh, u, chart_factor)
        record(pt, u)
        growth = growth + 1 if hist.residual[-1] > hist.residual[-2] else 0
        if growth >= 2:
            raise IterationDiverged("weighted residual grew in two consecutive steps", history=hist.rows())
    hist.u = u
    return hist


def _fd_jacobian(mesh, u, chart_factor, h=1e-7):
    """Column-compressed finite-difference Jacobian at u (5 x 5 stencil colouring)."""
    import scipy.sparse as sp
    J0 = linearization(mesh).tocsc()
    k = mesh.unknowns
    n2 = mesh.grid.n2
    I, Jj = np.divmod(k, n2)
    colour = (I % 5) * 5 + (Jj % 5)
    base = perturbed_theta(mesh, u, chart_factor, check=False).theta
    rows, cols, vals = [], [], []
    pattern = J0.tocoo()
    for c in range(25):
        sel = colour == c
        if not sel.any():
            continue
        d = np.zeros(k.size)
        d[sel] = h
        diff = (perturbed_theta(mesh, u + d, chart_factor, check=False).theta - base) / h
        mask = sel[pattern.col]
        rows.append(pattern.row[mask])
        cols.append(pattern.col[mask])
        vals.append(diff[pattern.row[mask]])
    return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=J0.shape)


def quadratic_remainder(mesh, u, v=None):
    """Q(du) - Q(dv) with Q(du) = Theta(u) - Theta(0) - L u (exact discrete L)."""
    J = linearization(mesh)
    th0 = mesh.residual[mesh.unknowns]

    def Q(w):
        return perturbed_theta(mesh, w, check=False).theta - th0 - J @ w

    return Q(u) if v is None else Q(u) - Q(v)


@dataclass(frozen=True)
class RemainderScan:
    s: np.ndarray
    remainders: np.ndarray
    slopes: np.ndarray


def remainder_scan(mesh, fields, s_values=np.logspace(-3, -1, 5), spec=WeightSpec()):
    """Weighted ||Theta(su) - Theta(0) - s L u|| against s, and the log-log slope per field."""
    rem = np.array([[residual_norm(mesh, quadratic_remainder(mesh, s * u), spec) for s in s_values]
                    for u in fields])
    slopes = np.array([fit_slope(s_values, r, exclude_largest=False) for r in rem])
    return RemainderScan(np.asarray(s_values), rem, slopes)


@dataclass
class QuadraticReport:
    ts: np.ndarray
    ratios: np.ndarray
    envelope: np.ndarray
    homogeneity_slopes: np.ndarray
    spread: np.ndarray = None

    @property
    def max_over_median(self):
        return np.max(self.ratios, axis=1) / np.median(self.ratios, axis=1)

    @property
    def within_envelope(self):
        return bool(np.all(self.ratios <= self.envelope[:, None]))

    def to_dict(self):
        return dict(ts=self.ts.tolist(), ratios=self.ratios.tolist(), envelope=self.envelope.tolist(),
                    max_over_median=self.max_over_median.tolist(), within_envelope=self.within_envelope,
                    homogeneity_slopes=self.homogeneity_slopes.tolist())


def quadratic_scaling_check(meshes, trials=20, spec=WeightSpec(), seed=0, amplitude=(0.05, 0.5)):
    """Empirical constant of ||Q(du) - Q(dv)|| <= C t^{gamma-2} ||u - v|| (||u|| + ||v||).

    Numerator in W^{1,2}_{beta+1,gamma-2}, denominator in W^{3,2}_{beta,gamma}. The
    envelope is C_max(t_max) (t / t_max)^{gamma-2}. Trial n uses the same
    random coefficients at every t, so the t-dependence is compared on
    matching perturbation shapes.
    """
    out_spec = WeightSpec(1, 2.0, spec.beta + 1.0, spec.gamma - 2.0)
    in_spec = WeightSpec(3, 2.0, spec.beta, spec.gamma)
    ts = np.array([mesh.t for mesh in meshes])
    ratios = np.empty((len(meshes), trials))
    slopes = np.empty(len(meshes))
    for i, mesh in enumerate(meshes):
        for n in range(trials):
            # trial n draws the same coefficients at every t
            rng = np.random.default_rng([seed, n])
            u = random_field(mesh, rng, amplitude=rng.uniform(*amplitude))
            v = random_field(mesh, rng, amplitude=rng.uniform(*amplitude))
            num = sobolev_norm(mesh, quadratic_remainder(mesh, u, v), out_spec)
            den = sobolev_norm(mesh, u - v, in_spec) * (sobolev_norm(mesh, u, in_spec) + sobolev_norm(mesh, v, in_spec))
            ratios[i, n] = num / den
        u = random_field(mesh, np.random.default_rng([seed, trials]), amplitude=0.5)
        s = np.logspace(-3, -1, 5)
        q = [sobolev_norm(mesh, quadratic_remainder(mesh, si * u), out_spec) for si in s]
        slopes[i] = fit_slope(s, q, exclude_largest=False)
    top = int(np.argmax(ts))
    envelope = ratios[top].max() * (ts / ts[top]) ** (spec.gamma - 2.0)
    return QuadraticReport(ts, ratios, envelope, slopes)


def ball_exponent(m, tau, gamma):
    """Midpoint of the admissible range 2 - gamma < alpha < tau (2 - gamma) + (1 - tau) m."""
    return 0.5 * ((2.0 - gamma) + predicted_exponent(m, tau, gamma))


def calibrate_defect(mesh, trials=5, seed=1, s=0.1):
    """Constant c with defect <= c max|grad u|^2 over random smooth fields."""
    rng = np.random.default_rng(seed)
    cs = []
    for _ in range(trials):
        u = s * random_field(mesh, rng, amplitude=1.0)
        pt = perturbed_theta(mesh, u, check=False)
        cs.append(pt.defect.max() / pt.max_grad**2)
    return float(max(cs))
