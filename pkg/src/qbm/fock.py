"""Truncated Fock-space reference path for Gaussian QFI evaluation.

A zero-mean Gaussian state diagonalizes analytically via its Williamson
decomposition cm = S D S^T: the eigenvalues are products of geometric
thermal weights and the eigenvectors are number states rotated by the
Gaussian unitary of S.  The QFI of a quadratic generator G = 1/2 R^T A R
then reduces to the textbook SLD eigen-sum with the generator expressed
in the rotated frame, A -> S^T A S, whose number-basis matrix elements
are sparse ladder products.  No dense diagonalization is ever needed;
the truncation enters only through the geometric tails, which are
controlled exactly.

Mode ordering everywhere: quadratures interleaved (X1, P1, X2, P2),
vacuum covariance = I/2, symplectic form Omega = oplus [[0,1],[-1,0]].
"""

from __future__ import annotations

import numpy as np
from scipy import sparse
from scipy.linalg import schur

from .errors import NumericsError

__all__ = [
    "symplectic_form",
    "symplectic_eigenvalues",
    "williamson",
    "fock_cutoff",
    "FockWorkspace",
    "qfi_fock",
]

_CUTOFF_CAP = 200


def symplectic_form(n_modes):
    """Omega = oplus_n [[0, 1], [-1, 0]] in interleaved ordering."""
    omega = np.zeros((2 * n_modes, 2 * n_modes))
    for i in range(n_modes):
        omega[2 * i, 2 * i + 1] = 1.0
        omega[2 * i + 1, 2 * i] = -1.0
    return omega


def symplectic_eigenvalues(cm):
    """Williamson spectrum via |imag eig(Omega cm)|, ascending."""
    n = cm.shape[0] // 2
    ev = np.linalg.eigvals(symplectic_form(n) @ cm)
    vals = np.sort(np.abs(ev.imag))
    return vals[::2]  # each value appears as an (+i, -i) pair


def williamson(cm):
    """Decompose cm = S diag(nu_1, nu_1, ..., nu_n, nu_n) S^T, S symplectic.

    Standard construction: Cholesky cm = L L^T, real Schur of the
    antisymmetric L^T Omega L into 2x2 blocks, rescale by 1/sqrt(nu).
    Returns (S, nus).
    """
    n = cm.shape[0] // 2
    omega = symplectic_form(n)
    lchol = np.linalg.cholesky(cm)
    kanti = lchol.T @ omega @ lchol
    tmat, qmat = schur(kanti, output="real")
    qmat = qmat.copy()
    nus = np.empty(n)
    for i in range(n):
        b = tmat[2 * i, 2 * i + 1]
        if b < 0:
            qmat[:, [2 * i, 2 * i + 1]] = qmat[:, [2 * i + 1, 2 * i]]
            b = -b
        nus[i] = b
    scale = np.repeat(1.0 / np.sqrt(nus), 2)
    smat = lchol @ (qmat * scale)
    # sanity: both defining identities, cheap at these sizes
    dmat = np.diag(np.repeat(nus, 2))
    if not np.allclose(smat @ dmat @ smat.T, cm, rtol=0, atol=1e-10 * max(1, np.abs(cm).max())):
        raise NumericsError("williamson reconstruction failed")
    if not np.allclose(smat @ omega @ smat.T, omega, rtol=0, atol=1e-9):
        raise NumericsError("williamson output not symplectic")
    return smat, nus


def fock_cutoff(nu, deficit_tol=1e-10):
    """Per-mode cutoff so the geometric tail stays below deficit_tol.

    A Williamson mode nu carries thermal weights (1-q) q^n with
    q = (2 nu - 1)/(2 nu + 1); the mass above cutoff N is q^(N+1).
    """
    q = max((2.0 * nu - 1.0) / (2.0 * nu + 1.0), 0.0)
    if q == 0.0:
        return 8
    need = int(np.ceil(np.log(deficit_tol) / np.log(q)))
    return max(8, min(need + 2, _CUTOFF_CAP))


def _ladder_quadratures(n_max):
    """Sparse X and P on a single-mode basis truncated at n_max."""
    dim = n_max + 1
    a = sparse.diags_array(np.sqrt(np.arange(1.0, dim)), offsets=1, format="csr")
    x = (a + a.T) / np.sqrt(2.0)
    p = 1j * (a.T - a) / np.sqrt(2.0)
    return x.tocsr(), p.tocsr()


class FockWorkspace:
    """Amortized QFI oracle for one state and many quadratic generators.

    Decomposes the state once (Williamson), stores the ten symmetrized
    quadrature products in the rotated number basis as sparse matrices,
    and evaluates the SLD QFI

        2 sum_{nm} (p_n - p_m)^2 / (p_n + p_m) |<n| G' |m>|^2

    for any generator coefficient matrix A (G = 1/2 R^T A R in the lab
    frame, G' the same operator in the eigenframe, A' = S^T A S).
    """

    def __init__(self, cm, n_max=None, deficit_tol=1e-10):
        n_modes = cm.shape[0] // 2
        self.smat, self.nus = williamson(cm)
        qs = np.maximum((2.0 * self.nus - 1.0) / (2.0 * self.nus + 1.0), 0.0)
        if n_max is None:
            cutoffs = [fock_cutoff(nu, deficit_tol) for nu in self.nus]
        else:
            cutoffs = [int(n_max)] * n_modes
        self.cutoffs = tuple(cutoffs)
        tails = np.array([q ** (c + 1) for q, c in zip(qs, cutoffs)])
        self.trace_deficit = float(1.0 - np.prod(1.0 - tails))
        if self.trace_deficit > deficit_tol:
            raise NumericsError(
                f"Fock truncation too coarse: trace deficit {self.trace_deficit:.2e} "
                f"(tolerance {deficit_tol:.0e}) at cutoffs {self.cutoffs}"
            )
        weights = []
        for q, c in zip(qs, cutoffs):
            w = q ** np.arange(c + 1) if q > 0.0 else np.concatenate(
                ([1.0], np.zeros(c))
            )
            weights.append(w * (1.0 - q) if q > 0.0 else w)
        p = weights[0]
        for w in weights[1:]:
            p = np.outer(p, w).ravel()
        self.p = p / p.sum()

        quads = []
        eyes = [sparse.identity(c + 1, format="csr") for c in cutoffs]
        for mode in range(n_modes):
            x, pq = _ladder_quadratures(cutoffs[mode])
            for op in (x, pq):
                factors = list(eyes)
                factors[mode] = op
                full = factors[0]
                for f in factors[1:]:
                    full = sparse.kron(full, f, format="csr")
                quads.append(full)
        self._pairs = {}
        m = 2 * n_modes
        for i in range(m):
            for j in range(i, m):
                qq = 0.5 * (quads[i] @ quads[j] + quads[j] @ quads[i])
                self._pairs[(i, j)] = qq.tocsr()

    def qfi(self, amat):
        """QFI for the lab-frame generator G = 1/2 R^T A R."""
        aprime = self.smat.T @ np.asarray(amat, dtype=float) @ self.smat
        m = aprime.shape[0]
        gop = None
        for i in range(m):
            for j in range(i, m):
                coeff = aprime[i, j] if i == j else aprime[i, j] + aprime[j, i]
                if coeff != 0.0:
                    term = (0.5 * coeff) * self._pairs[(i, j)]
                    gop = term if gop is None else gop + term
        if gop is None:
            return 0.0
        coo = gop.tocoo()
        pn, pm = self.p[coo.row], self.p[coo.col]
        den = pn + pm
        mask = den > 1e-300
        num = (pn[mask] - pm[mask]) ** 2 / den[mask]
        return float(2.0 * np.sum(num * np.abs(coo.data[mask]) ** 2))


def qfi_fock(cm, amat, n_max=None, deficit_tol=1e-10):
    """One-shot QFI of a Gaussian state under G = 1/2 R^T A R rotations."""
    return FockWorkspace(cm, n_max=n_max, deficit_tol=deficit_tol).qfi(amat)
