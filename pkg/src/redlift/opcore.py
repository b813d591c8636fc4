"""Finite-dimensional operator utilities.

Operators are plain two-dimensional complex ``numpy`` arrays; the array shape
carries the domain and codomain dimensions, and zero-dimensional spaces are
arrays with a zero-length axis.  This module provides the tolerance
configuration, norm classification, defect operators, the Douglas
factorization and the defect-space solve used to build co-isometries.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import (BadDims, NoFactorization, NonFinite, NotAContraction,
                     NotCoisometric, NotSolvable, ShapeMismatch)

__all__ = [
    "ToleranceConfig", "DEFAULT_TOL", "DefectData", "BlockOperator",
    "as_operator", "opnorm", "classify", "defect", "douglas_solve",
    "parrott_coisometry_solve", "range_basis", "kernel_basis",
    "canonical_basis", "polar_unitary", "adjoint",
]


@dataclass(frozen=True)
class ToleranceConfig:
    """Numerical thresholds.

    rank_tol
        Relative eigenvalue cutoff for rank decisions.  Singular values are
        compared against its square root, which is the same rule applied to
        squared quantities.
    check_tol
        Acceptance threshold for identity and inequality checks.
    norm_slack
        Margin used for strict inequalities such as ``norm < 1``.
    """

    rank_tol: float = 1e-10
    check_tol: float = 1e-9
    norm_slack: float = 1e-6

    def __post_init__(self):
        if not (0 < self.rank_tol <= self.check_tol <= self.norm_slack < 1):
            raise ValueError(
                "tolerances must satisfy 0 < rank_tol <= check_tol <= norm_slack < 1")

    @property
    def sv_cutoff(self) -> float:
        return float(np.sqrt(self.rank_tol))


DEFAULT_TOL = ToleranceConfig()


def as_operator(x, rows=None, cols=None, name="operator") -> np.ndarray:
    """Coerce ``x`` to a finite complex 2-D array, optionally checking its shape."""
    a = np.asarray(x, dtype=complex)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim != 2:
        raise BadDims(f"{name} must be two-dimensional, got shape {a.shape}")
    if rows is not None and a.shape[0] != rows:
        raise ShapeMismatch(f"{name} has {a.shape[0]} rows, expected {rows}")
    if cols is not None and a.shape[1] != cols:
        raise ShapeMismatch(f"{name} has {a.shape[1]} columns, expected {cols}")
    if not np.all(np.isfinite(a)):
        raise NonFinite(f"{name} has non-finite entries")
    return a


def adjoint(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def opnorm(a: np.ndarray) -> float:
    """Spectral norm, with the empty operator having norm zero."""
    if a.size == 0:
        return 0.0
    return float(np.linalg.norm(a, 2))


def _identity_defect(a: np.ndarray, side: str) -> float:
    if side == "left":
        g = adjoint(a) @ a
    else:
        g = a @ adjoint(a)
    if g.size == 0:
        return 0.0
    return opnorm(g - np.eye(g.shape[0]))


def classify(m, tol: ToleranceConfig = DEFAULT_TOL) -> str:
    """Return one of unitary, isometry, co_isometry, strict_contraction,
    contraction or expansion.

    Isometry and co-isometry are tested first, so a square matrix with both
    properties is reported as unitary.
    """
    m = as_operator(m)
    iso = _identity_defect(m, "left") <= tol.check_tol
    coiso = _identity_defect(m, "right") <= tol.check_tol
    if iso and coiso:
        return "unitary"
    if iso:
        return "isometry"
    if coiso:
        return "co_isometry"
    nrm = opnorm(m)
    if nrm <= 1 - tol.norm_slack:
        return "strict_contraction"
    if nrm <= 1 + tol.check_tol:
        return "contraction"
    return "expansion"


def _max_phase_fix(basis: np.ndarray) -> np.ndarray:
    # Make the largest entry of each column real and positive.
    if basis.shape[1] == 0:
        return basis
    idx = np.argmax(np.abs(basis), axis=0)
    ph = basis[idx, np.arange(basis.shape[1])]
    return basis * (np.conj(ph) / np.abs(ph))


def canonical_basis(q: np.ndarray) -> np.ndarray:
    """Return a deterministic orthonormal basis of ``range(q)``.

    ``q`` must have orthonormal columns.  The basis depends only on the
    subspace (through its projector), so coordinate subspaces come back as
    standard basis vectors.
    """
    r = q.shape[1]
    if r == 0:
        return q.copy()
    p = q @ adjoint(q)
    qq, _, piv = sla.qr(p, pivoting=True, mode="economic")
    basis = qq[:, :r]
    order = np.argsort(piv[:r], kind="stable")
    return _max_phase_fix(basis[:, order])


def range_basis(a: np.ndarray, tol: ToleranceConfig = DEFAULT_TOL,
                canonical: bool = False) -> np.ndarray:
    """Orthonormal basis of the column space of ``a``."""
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    if a.size == 0:
        return np.zeros((n, 0), dtype=complex)
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    keep = s > tol.sv_cutoff * max(s[0], 1.0)
    basis = u[:, keep]
    return canonical_basis(basis) if canonical else basis


def kernel_basis(a: np.ndarray, tol: ToleranceConfig = DEFAULT_TOL,
                 canonical: bool = False) -> np.ndarray:
    """Orthonormal basis of the null space of ``a``."""
    a = np.asarray(a, dtype=complex)
    n = a.shape[1]
    if a.shape[0] == 0 or n == 0:
        return canonical_basis(np.eye(n, dtype=complex)) if canonical else np.eye(n, dtype=complex)
    _, s, vh = np.linalg.svd(a, full_matrices=True)
    rank = int(np.sum(s > tol.sv_cutoff * max(s[0], 1.0)))
    basis = adjoint(vh[rank:, :])
    return canonical_basis(basis) if canonical else basis


def pinv(a: np.ndarray, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Moore-Penrose inverse with the package rank rule."""
    a = np.asarray(a, dtype=complex)
    if a.size == 0:
        return np.zeros((a.shape[1], a.shape[0]), dtype=complex)
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    keep = s > tol.sv_cutoff * max(s[0], 1.0)
    return adjoint(vh[keep]) @ (adjoint(u[:, keep]) / s[keep, None])


def polar_unitary(a: np.ndarray) -> np.ndarray:
    """Nearest unitary (or partial isometry) factor of ``a``."""
    if a.size == 0:
        return np.asarray(a, dtype=complex)
    u, _, vh = np.linalg.svd(a, full_matrices=False)
    return u @ vh


@dataclass(frozen=True)
class DefectData:
    """Defect operator ``(I - N*N)^(1/2)`` and an isometric embedding of its range.

    ``embedding`` has orthonormal columns spanning the defect space; these
    columns are the coordinates used for the defect space everywhere else.
    """

    defect_operator: np.ndarray
    embedding: np.ndarray

    @property
    def rank(self) -> int:
        return self.embedding.shape[1]

    @property
    def ambient_dim(self) -> int:
        return self.embedding.shape[0]

    @property
    def chart(self) -> np.ndarray:
        """Defect operator as a map from the defect space to the defect space."""
        return adjoint(self.embedding) @ self.defect_operator @ self.embedding

    @property
    def coordinate_map(self) -> np.ndarray:
        """Defect operator as a map from the ambient space into the defect space."""
        return adjoint(self.embedding) @ self.defect_operator


def defect(n, tol: ToleranceConfig = DEFAULT_TOL) -> DefectData:
    """Defect operator of a contraction.

    Eigenvalues of ``I - N*N`` below ``rank_tol * max(lambda_max, 1)`` are set
    to zero, so the defect operator and the embedding have the same range.
    """
    n = as_operator(n)
    if opnorm(n) > 1 + tol.check_tol:
        raise NotAContraction(f"norm {opnorm(n):.3e} exceeds 1", residual=opnorm(n) - 1)
    dim = n.shape[1]
    if dim == 0:
        z = np.zeros((0, 0), dtype=complex)
        return DefectData(z, z)
    h = np.eye(dim) - adjoint(n) @ n
    h = 0.5 * (h + adjoint(h))
    w, v = np.linalg.eigh(h)
    w = np.clip(w, 0.0, None)
    keep = w > tol.rank_tol * max(w.max(), 1.0)
    vk = v[:, keep]
    d = (vk * np.sqrt(w[keep])) @ adjoint(vk)
    return DefectData(d, canonical_basis(vk))


def douglas_solve(g1, g2, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Minimal-norm ``L`` with ``g1 @ L = g2``.

    Raises NoFactorization when the residual exceeds ``check_tol``.  When
    ``g1 g1* = g2 g2*`` the solution restricted to ``range(g2*)`` is an
    isometry onto ``range(g1*)``.
    """
    g1 = as_operator(g1, name="G1")
    g2 = as_operator(g2, rows=g1.shape[0], name="G2")
    lam = pinv(g1, tol) @ g2
    res = opnorm(g1 @ lam - g2)
    if res > tol.check_tol:
        raise NoFactorization(f"residual {res:.3e}", residual=res)
    return lam


def parrott_coisometry_solve(dstar: DefectData, m, tol: ToleranceConfig = DEFAULT_TOL) -> np.ndarray:
    """Solve ``dstar.defect_operator @ embedding @ phi = m`` for a co-isometry ``phi``.

    ``phi`` maps the domain of ``m`` into defect-space coordinates.  The
    defect operator is injective on its own range, so the solution is unique.
    """
    m = as_operator(m, rows=dstar.ambient_dim, name="M")
    k = m.shape[1]
    if dstar.rank == 0:
        res = opnorm(m)
        if res > tol.check_tol:
            raise NotSolvable(f"defect space is trivial but |M| = {res:.3e}", residual=res)
        return np.zeros((0, k), dtype=complex)
    j = dstar.embedding
    phi = np.linalg.solve(dstar.chart, adjoint(j) @ m)
    res = opnorm(dstar.defect_operator @ j @ phi - m)
    if res > tol.check_tol:
        raise NotSolvable(f"residual {res:.3e}", residual=res)
    cres = _identity_defect(phi, "right")
    if cres > tol.check_tol:
        raise NotCoisometric(f"solution is not a co-isometry, defect {cres:.3e}", residual=cres)
    return phi


@dataclass(frozen=True)
class BlockOperator:
    """A 2x2 operator matrix ``[[tl, tr], [bl, br]]`` stored as one array."""

    matrix: np.ndarray
    row_split: int
    col_split: int

    def __post_init__(self):
        m = as_operator(self.matrix, name="block operator")
        object.__setattr__(self, "matrix", m)
        if not (0 <= self.row_split <= m.shape[0] and 0 <= self.col_split <= m.shape[1]):
            raise BadDims("split indices out of range")

    @classmethod
    def from_blocks(cls, tl, tr, bl, br) -> "BlockOperator":
        tl, tr, bl, br = (np.asarray(b, dtype=complex) for b in (tl, tr, bl, br))
        if tl.shape[0] != tr.shape[0] or bl.shape[0] != br.shape[0]:
            raise ShapeMismatch("row blocks disagree")
        if tl.shape[1] != bl.shape[1] or tr.shape[1] != br.shape[1]:
            raise ShapeMismatch("column blocks disagree")
        return cls(np.block([[tl, tr], [bl, br]]), tl.shape[0], tl.shape[1])

    @property
    def tl(self):
        return self.matrix[:self.row_split, :self.col_split]

    @property
    def tr(self):
        return self.matrix[:self.row_split, self.col_split:]

    @property
    def bl(self):
        return self.matrix[self.row_split:, :self.col_split]

    @property
    def br(self):
        return self.matrix[self.row_split:, self.col_split:]

    @property
    def blocks(self):
        return self.tl, self.tr, self.bl, self.br
