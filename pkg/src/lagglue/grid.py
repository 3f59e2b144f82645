"""Structured 2D grids with sparse difference operators.

Direction 1 is either an 'axis' direction (cell-centred nodes, reflection
ghosts at both ends, zero flux through the end faces) or a 'dirichlet'
direction (node-centred, end nodes held at zero). Direction 2 is always
'dirichlet'. Node (i, j) has flat index i * n2 + j.
"""
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp


@dataclass(frozen=True)
class Grid2D:
    n1: int
    n2: int
    h1: float
    h2: float
    bc1: str = "axis"

    def __post_init__(self):
        if self.bc1 not in ("axis", "dirichlet"):
            raise ValueError("bc1 must be 'axis' or 'dirichlet'")
        if self.n1 < 3 or self.n2 < 3:
            raise ValueError("grid needs at least 3 nodes per direction")

    @property
    def size(self):
        return self.n1 * self.n2

    @property
    def shape(self):
        return (self.n1, self.n2)

    def unknown_mask(self):
        mask = np.ones(self.shape, bool)
        mask[:, 0] = mask[:, -1] = False
        if self.bc1 == "dirichlet":
            mask[0, :] = mask[-1, :] = False
        return mask.ravel()

    @property
    def unknowns(self):
        return np.flatnonzero(self.unknown_mask())

    def extension(self):
        """Sparse map from unknowns to all nodes (zero on Dirichlet nodes)."""
        idx = self.unknowns
        return sp.csr_matrix((np.ones(idx.size), (idx, np.arange(idx.size))), shape=(self.size, idx.size))

    def restriction(self):
        return self.extension().T.tocsr()

    def neighbour(self, i, j, parity=1.0):
        """Flat index and sign of node (i, j), resolving axis ghosts by reflection."""
        i = np.asarray(i)
        sign = np.ones(i.shape)
        if self.bc1 == "axis":
            lo, hi = i < 0, i >= self.n1
            sign = np.where(lo | hi, parity, 1.0)
            i = np.where(lo, -1 - i, np.where(hi, 2 * self.n1 - 1 - i, i))
        return i * self.n2 + np.asarray(j), sign

    def d1(self, parity=1.0):
        """Centred first difference in direction 1 on all nodes."""
        I, J = np.divmod(np.arange(self.size), self.n2)
        rows, cols, vals = [], [], []
        if self.bc1 == "axis":
            for off, w in ((1, 0.5), (-1, -0.5)):
                k, s = self.neighbour(I + off, J, parity)
                rows.append(np.arange(self.size)), cols.append(k), vals.append(w * s / self.h1)
        else:
            inner = (I > 0) & (I < self.n1 - 1)
            n = np.arange(self.size)
            for off, w in ((1, 0.5), (-1, -0.5)):
                rows.append(n[inner]), cols.append(n[inner] + off * self.n2), vals.append(np.full(inner.sum(), w / self.h1))
            for end, sgn in ((I == 0, 1), (I == self.n1 - 1, -1)):
                for off, w in ((0, -1.5), (1, 2.0), (2, -0.5)):
                    rows.append(n[end]), cols.append(n[end] + sgn * off * self.n2)
                    vals.append(np.full(end.sum(), sgn * w / self.h1))
        return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                             shape=(self.size, self.size))

    def d2(self):
        """First difference in direction 2; second-order one-sided at the ends."""
        I, J = np.divmod(np.arange(self.size), self.n2)
        n = np.arange(self.size)
        rows, cols, vals = [], [], []
        inner = (J > 0) & (J < self.n2 - 1)
        for off, w in ((1, 0.5), (-1, -0.5)):
            rows.append(n[inner]), cols.append(n[inner] + off), vals.append(np.full(inner.sum(), w / self.h2))
        for end, sgn in ((J == 0, 1), (J == self.n2 - 1, -1)):
            for off, w in ((0, -1.5), (1, 2.0), (2, -0.5)):
                rows.append(n[end]), cols.append(n[end] + sgn * off), vals.append(np.full(end.sum(), sgn * w / self.h2))
        return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                             shape=(self.size, self.size))

    def second_differences(self):
        """Centred d11, d22 and d12 (even parity), for diagnostics on interior nodes."""
        D1, D2 = self.d1(), self.d2()
        I, J = np.divmod(np.arange(self.size), self.n2)
        n = np.arange(self.size)
        rows, cols, vals = [], [], []
        for off, w in ((-1, 1.0), (0, -2.0), (1, 1.0)):
            k, s = self.neighbour(I + off, J) if self.bc1 == "axis" else (np.clip(I + off, 0, self.n1 - 1) * self.n2 + J, 1.0)
            rows.append(n), cols.append(k), vals.append(w * np.broadcast_to(s, n.shape) / self.h1**2)
        d11 = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(self.size,) * 2)
        rows, cols, vals = [], [], []
        for off, w in ((-1, 1.0), (0, -2.0), (1, 1.0)):
            jj = np.clip(J + off, 0, self.n2 - 1)
            rows.append(n), cols.append(I * self.n2 + jj), vals.append(np.full(n.size, w / self.h2**2))
        d22 = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(self.size,) * 2)
        return d11, d22, (D1 @ D2).tocsr()


def fv_divergence_form(grid, omega, K11, K12, K22):
    """Sparse (1/omega) d_a (K^{ab} d_b u) on unknown rows, acting on all nodes.

    Nine-point flux form: face coefficients are node averages, normal
    derivatives are two-point differences and tangential derivatives are
    averages of centred differences. Axis end faces carry zero flux.
    """
    n1, n2, h1, h2 = grid.n1, grid.n2, grid.h1, grid.h2
    unk = grid.unknowns
    I, J = np.divmod(unk, n2)
    rows, cols, vals = [], [], []

    def add(r, k, v):
        rows.append(r)
        cols.append(k)
        vals.append(v)

    row = np.arange(unk.size)
    node = lambda i, j: grid.neighbour(i, j)[0]
    inside1 = lambda i: (i >= 0) & (i < n1)
    # direction-1 faces i + 1/2 (sgn = +1) and i - 1/2 (sgn = -1)
    for sgn in (1, -1):
        ia, ib = (I, I + 1) if sgn == 1 else (I - 1, I)
        live = inside1(ia) & inside1(ib)
        r, a_i, b_i, j = row[live], ia[live], ib[live], J[live]
        ka, kb = a_i * n2 + j, b_i * n2 + j
        k11 = 0.5 * (K11[ka] + K11[kb])
        k12 = 0.5 * (K12[ka] + K12[kb])
        c = sgn / (h1 * omega[unk[live]])
        add(r, kb, c * k11 / h1)
        add(r, ka, -c * k11 / h1)
        for ii in (a_i, b_i):
            add(r, ii * n2 + j + 1, c * k12 / (4 * h2))
            add(r, ii * n2 + j - 1, -c * k12 / (4 * h2))
    # direction-2 faces j + 1/2 and j - 1/2
    for sgn in (1, -1):
        ja, jb = (J, J + 1) if sgn == 1 else (J - 1, J)
        ka, kb = I * n2 + ja, I * n2 + jb
        k22 = 0.5 * (K22[ka] + K22[kb])
        k12 = 0.5 * (K12[ka] + K12[kb])
        c = sgn / (h2 * omega[unk])
        add(row, kb, c * k22 / h2)
        add(row, ka, -c * k22 / h2)
        for jj in (ja, jb):
            for off, w in ((1, 1.0), (-1, -1.0)):
                k, s = grid.neighbour(I + off, jj)
                add(row, k, w * s * c * k12 / (4 * h1))
    return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                         shape=(unk.size, grid.size))
