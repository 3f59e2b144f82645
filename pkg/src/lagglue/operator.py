"""Finite-volume assembly of the linearized operator and its smallest singular value.

The operator is

    L u = e^{-f/2} [cos theta_f (Delta u - 1/2 <grad f, grad u>) + sin theta_f <grad <F, JT>, grad u>],

the exact first variation of the residual under Hamiltonian graphs F + J dF(grad u).
Weighted versions are conjugated by W_in = e^{beta f/2} rho^{-gamma} sqrt(rho^{-m} dV)
and W_out = e^{(beta+1) f/2} rho^{2-gamma} sqrt(rho^{-m} dV), so the Euclidean norm of
W u is the discrete weighted L^2 norm.
"""
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as sla

from .errors import SpectralFailure
from .grid import fv_divergence_form
from .weighted import WeightSpec


@dataclass
class DiscreteOperator:
    """Weighted matrix W_out L W_in^{-1} on the unknowns with its pieces."""

    matrix: sp.csr_matrix
    L: sp.csr_matrix
    w_in: np.ndarray
    w_out: np.ndarray
    boundary: dict = field(default_factory=dict)

    @property
    def size(self):
        return self.matrix.shape[0]


def assemble_fields(grid, omega, metric_inv, df, djt=None, f=None, theta_f=None):
    """Unweighted sparse L on the unknowns of ``grid`` from node fields.

    ``omega`` is the volume density in grid coordinates, ``metric_inv`` the
    (N, 2, 2) inverse metric, ``df`` and ``djt`` the coordinate gradients of f
    and <F, JT>. Missing ``f`` or ``theta_f`` default to zero, giving Delta_f.
    """
    n = grid.size
    f = np.zeros(n) if f is None else np.asarray(f, float)
    theta_f = np.zeros(n) if theta_f is None else np.asarray(theta_f, float)
    gi = metric_inv
    K11, K12, K22 = omega * gi[:, 0, 0], omega * gi[:, 0, 1], omega * gi[:, 1, 1]
    E, R = grid.extension(), grid.restriction()
    lap = fv_divergence_form(grid, omega, K11, K12, K22) @ E
    D = [R @ grid.d1(1.0) @ E, R @ grid.d2() @ E]
    k = grid.unknowns
    drift_f = [gi[k, 0, b] * df[k, 0] + gi[k, 1, b] * df[k, 1] for b in range(2)]
    op = lap - 0.5 * (sp.diags(drift_f[0]) @ D[0] + sp.diags(drift_f[1]) @ D[1])
    pre = np.exp(-0.5 * f[k])
    L = sp.diags(pre * np.cos(theta_f[k])) @ op
    if djt is not None and np.any(np.sin(theta_f[k]) != 0):
        drift_j = [gi[k, 0, b] * djt[k, 0] + gi[k, 1, b] * djt[k, 1] for b in range(2)]
        L = L + sp.diags(pre * np.sin(theta_f[k])) @ (sp.diags(drift_j[0]) @ D[0] + sp.diags(drift_j[1]) @ D[1])
    return sp.csr_matrix(L)


def mesh_weights(mesh, spec):
    """Input and output weight diagonals on the unknowns."""
    k = mesh.unknowns
    f, rho = mesh.f[k], mesh.rho[k]
    base = np.sqrt(rho ** (-mesh.m) * mesh.volume[k])
    w_in = np.exp(0.5 * spec.beta * f) * rho ** (-spec.gamma) * base
    w_out = np.exp(0.5 * (spec.beta + 1.0) * f) * rho ** (2.0 - spec.gamma) * base
    return w_in, w_out


def assemble_L(mesh, spec=WeightSpec()):
    """Weighted finite-volume operator on a reduced mesh (p = 2 weights)."""
    L = assemble_fields(mesh.grid, mesh.omega, mesh.metric_inv, mesh.df, mesh.djt, mesh.f, mesh.theta_f)
    w_in, w_out = mesh_weights(mesh, spec)
    A = sp.diags(w_out) @ L @ sp.diags(1.0 / w_in)
    bc = {"theta": "axis reflection", "l": "dirichlet", "R_out": mesh.R_out,
          "y_max": float(np.abs(mesh.y).max())}
    return DiscreteOperator(sp.csr_matrix(A), L, w_in, w_out, bc)


@dataclass(frozen=True)
class SigmaResult:
    sigma: float
    iterations: int
    vector: np.ndarray


def sigma_min(matrix, tol=1e-10, max_iter=2000, seed=0):
    """Smallest singular value by inverse iteration on A^T A with one sparse LU."""
    A = sp.csc_matrix(matrix)
    try:
        lu = sla.splu(A)
    except RuntimeError as exc:
        raise SpectralFailure("sparse LU failed; operator is singular", detail=str(exc)) from exc
    rng = np.random.default_rng(seed)
    x = 1.0 + 0.1 * rng.standard_normal(A.shape[0])
    x /= np.linalg.norm(x)
    lam_old = 0.0
    for it in range(1, max_iter + 1):
        y = lu.solve(x, trans="T")
        z = lu.solve(y)
        lam = float(y @ y)
        if not np.isfinite(lam) or lam <= 0:
            raise SpectralFailure("inverse iteration broke down", iteration=it)
        x = z / np.linalg.norm(z)
        if abs(lam - lam_old) <= tol * lam:
            return SigmaResult(1.0 / np.sqrt(lam), it, x)
        lam_old = lam
    raise SpectralFailure("inverse iteration did not converge", iterations=max_iter, last=1.0 / np.sqrt(lam))


@dataclass(frozen=True)
class SigmaScan:
    ts: np.ndarray
    sigma: np.ndarray
    unknowns: np.ndarray
    iterations: np.ndarray

    @property
    def ratio(self):
        return float(self.sigma.max() / self.sigma.min())

    def rows(self):
        return [dict(t=float(t), sigma_min=float(s), unknowns=int(n), iterations=int(i))
                for t, s, n, i in zip(self.ts, self.sigma, self.unknowns, self.iterations)]


def sigma_min_scan(meshes, spec=WeightSpec(), tol=1e-10):
    """sigma_min of the weighted operator for each reduced mesh (one per t)."""
    ts, sig, nn, its = [], [], [], []
    for mesh in meshes:
        res = sigma_min(assemble_L(mesh, spec).matrix, tol=tol)
        ts.append(mesh.t)
        sig.append(res.sigma)
        nn.append(mesh.unknowns.size)
        its.append(res.iterations)
    return SigmaScan(np.array(ts), np.array(sig), np.array(nn), np.array(its))


def wing_potential(beta, s):
    """Zeroth-order term of e^{beta f/2} Delta_f e^{-beta f/2} on the translating Grim Reaper.

    In arclength s along the curve f = -2 log cosh s + const, which gives
    (-beta/2)(Delta f - |grad f|^2/2 - beta |grad f|^2/2) = beta (1 + beta tanh^2 s).
    """
    return beta * (1.0 + beta * np.tanh(np.asarray(s, float)) ** 2)
