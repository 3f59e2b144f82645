"""Pointwise geometry of immersions into C^m with the flat Calabi-Yau data.

Points and tangent vectors are complex arrays; the complex structure J is
multiplication by ``1j``. Frames may carry leading batch dimensions: a
jacobian of shape ``(..., m, m)`` stores the tangent vectors ``dF/dx_i``
as its columns.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DegenerateFrame, NotLagrangian

LAGRANGIAN_TOL = 1e-6


def real_inner(z, w):
    """Euclidean inner product <z, w> = Re sum conj(z) w over the last axis."""
    return np.real(np.sum(np.conj(z) * w, axis=-1))


def omega(z, w):
    """Standard symplectic form omega_0(z, w) = Im sum conj(z) w."""
    return np.imag(np.sum(np.conj(z) * w, axis=-1))


@dataclass(frozen=True)
class KahlerBackground:
    """Flat C^m with soliton direction ``T`` and reference phase ``phase_ref``."""

    m: int
    T: Optional[np.ndarray] = None
    phase_ref: float = 0.0

    def __post_init__(self):
        if self.m < 2:
            raise ValueError("dimension m must be at least 2")
        T = np.zeros(self.m, complex) if self.T is None else np.asarray(self.T, complex)
        if self.T is None:
            T[-1] = -1.0
        if T.shape != (self.m,) or np.linalg.norm(T) == 0:
            raise ValueError("T must be a nonzero vector of length m")
        object.__setattr__(self, "T", T)

    def f(self, z):
        """Potential f(z) = 2 <z, T>."""
        return 2.0 * real_inner(z, self.T)

    def jt_pairing(self, z):
        """<z, JT>."""
        return real_inner(z, 1j * self.T)

    def omega_f(self, z):
        """Scalar factor e^{-f/2 - i<z,JT>} multiplying dz_1 ^ ... ^ dz_m."""
        return np.exp(-0.5 * self.f(z) - 1j * self.jt_pairing(z))


@dataclass(frozen=True)
class FrameData:
    """Point, first and (optionally) second derivatives of an immersion."""

    point: np.ndarray
    jacobian: np.ndarray
    hessian: Optional[np.ndarray] = None

    @property
    def m(self):
        return self.jacobian.shape[-1]

    def __getitem__(self, idx):
        hess = None if self.hessian is None else self.hessian[idx]
        return FrameData(self.point[idx], self.jacobian[idx], hess)


@dataclass(frozen=True)
class AngleReport:
    theta_L: np.ndarray
    theta_f: np.ndarray
    residual: np.ndarray
    defect: np.ndarray
    det_ratio: np.ndarray
    approximate: np.ndarray


def induced_metric(jacobian):
    J = np.asarray(jacobian)
    return np.real(np.einsum("...ki,...kj->...ij", np.conj(J), J))


def symplectic_matrix(jacobian):
    J = np.asarray(jacobian)
    return np.imag(np.einsum("...ki,...kj->...ij", np.conj(J), J))


def induced_metric_and_defect(frame, rank_tol=1e-12):
    """Induced metric g_ij = <dF_i, dF_j> and max_{i<j} |omega_0(dF_i, dF_j)|.

    Raises
    ------
    DegenerateFrame
        If the jacobian has real rank below m.
    """
    g = induced_metric(frame.jacobian)
    w = symplectic_matrix(frame.jacobian)
    ev = np.linalg.eigvalsh(g)
    if np.any(ev[..., 0] <= rank_tol * np.maximum(ev[..., -1], 1e-300)):
        raise DegenerateFrame("jacobian is rank deficient", min_eig=float(np.min(ev[..., 0])))
    defect = np.max(np.abs(w).reshape(w.shape[:-2] + (-1,)), axis=-1)
    return g, defect


def normalized_defect(jacobian):
    """Symplectic defect measured in an orthonormal frame of the tangent plane."""
    g = induced_metric(jacobian)
    L = np.linalg.cholesky(g)
    Linv = np.linalg.inv(L)
    w = symplectic_matrix(jacobian)
    wn = Linv @ w @ np.swapaxes(Linv, -1, -2)
    return np.max(np.abs(wn).reshape(wn.shape[:-2] + (-1,)), axis=-1)


def translator_residual(point, jacobian, bg):
    """Theta = Im(e^{-i theta0} F*Omega_f) / dV_g.

    For Lagrangian frames this equals e^{-f/2} sin(theta_f - theta_0).
    """
    det = np.linalg.det(jacobian)
    vol = np.sqrt(np.linalg.det(induced_metric(jacobian)))
    return np.imag(np.exp(-1j * bg.phase_ref) * det * bg.omega_f(point)) / vol


def lagrangian_angles(frame, bg, lag_tol=LAGRANGIAN_TOL):
    """Lagrangian angle, f-angle, translator residual and diagnostics.

    ``theta_L`` is the principal branch of arg det_C(DF), in (-pi, pi].
    Use :func:`unwrap_path` for a continuous branch along a curve.
    """
    det = np.linalg.det(frame.jacobian)
    if np.any(det == 0):
        raise DegenerateFrame("complex determinant vanishes")
    g, defect = induced_metric_and_defect(frame)
    vol = np.sqrt(np.linalg.det(g))
    theta_L = np.angle(det)
    theta_f = np.angle(np.exp(1j * (theta_L - bg.jt_pairing(frame.point))))
    residual = translator_residual(frame.point, frame.jacobian, bg)
    return AngleReport(theta_L, theta_f, residual, defect, np.abs(det) / vol, defect > lag_tol)


def unwrap_path(theta):
    """Continuous branch of an angle sampled along a path."""
    return np.unwrap(np.asarray(theta))


def orthonormalize(plane):
    """Real Gram-Schmidt of the columns of ``plane`` (m complex columns)."""
    g = induced_metric(plane)
    R = np.linalg.cholesky(g).T
    return plane @ np.linalg.inv(R)


def principal_angles(plane_a, plane_b, lag_tol=LAGRANGIAN_TOL):
    """Characterizing angles of a pair of Lagrangian planes.

    Returns ``phi`` in [0, pi)^m, sorted, such that a unitary map sends
    ``plane_a`` to R^m and ``plane_b`` to diag(e^{i phi}) R^m. Computed from
    the eigenvalues e^{2 i phi} of U U^T with U = A^* B for unitary
    orthonormalized frames A, B. Swapping the arguments maps phi to pi - phi.
    """
    a = np.asarray(plane_a, complex)
    b = np.asarray(plane_b, complex)
    for p in (a, b):
        if normalized_defect(p) > lag_tol:
            raise NotLagrangian("column set does not span a Lagrangian plane", defect=float(normalized_defect(p)))
    A, B = orthonormalize(a), orthonormalize(b)
    U = np.conj(A.T) @ B
    ev = np.linalg.eigvals(U @ U.T)
    phi = np.mod(0.5 * np.angle(ev), np.pi)
    phi[phi > np.pi - 1e-13] = 0.0
    return np.sort(phi)
