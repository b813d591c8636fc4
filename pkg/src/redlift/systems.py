"""Discrete-time linear systems and their truncated Hardy-space operators.

A system ``(Z, B, C, D)`` has transfer function ``D + lam C (I - lam Z)^{-1} B``
and observability function ``C (I - lam Z)^{-1}``.  Multiplication by the
transfer function and the map from states to observed output sequences are
represented by their compressions to polynomials of degree at most ``K``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (NotAContraction, NotCoisometric, NotObservable,
                     ResolventSingular, ShapeMismatch)
from .opcore import (DEFAULT_TOL, ToleranceConfig, adjoint, as_operator,
                     opnorm, pinv, polar_unitary, range_basis)

__all__ = [
    "LinearSystem", "TruncatedHardyOperator", "block_toeplitz", "transfer_eval",
    "observability_eval", "taylor", "truncated_ops", "strong_stability",
    "observable_reduction", "unitary_equivalence", "coisometry_defect",
]

_COND_LIMIT = 1e12


@dataclass(frozen=True)
class LinearSystem:
    """State-space system with a contractive system matrix ``[[Z, B], [C, D]]``.

    ``check_contraction=False`` skips the contractivity test, for evaluating
    realizations that are only used as formulas (for instance scalar examples
    whose system matrix is not a contraction).
    """

    state_op: np.ndarray
    input_op: np.ndarray
    output_op: np.ndarray
    feed_op: np.ndarray
    check_contraction: bool = field(default=True, compare=False, repr=False)

    def __post_init__(self):
        z = as_operator(self.state_op, name="Z")
        n = z.shape[0]
        if z.shape[1] != n:
            raise ShapeMismatch("state operator must be square")
        b = as_operator(self.input_op, rows=n, name="B")
        c = as_operator(self.output_op, cols=n, name="C")
        d = as_operator(self.feed_op, rows=c.shape[0], cols=b.shape[1], name="D")
        for name, val in zip(("state_op", "input_op", "output_op", "feed_op"), (z, b, c, d)):
            object.__setattr__(self, name, val)
        nrm = opnorm(self.system_matrix) if self.check_contraction else 0.0
        if nrm > 1 + DEFAULT_TOL.check_tol:
            raise NotAContraction(f"system matrix has norm {nrm:.6g}", residual=nrm - 1)

    @property
    def state_dim(self) -> int:
        return self.state_op.shape[0]

    @property
    def input_dim(self) -> int:
        return self.input_op.shape[1]

    @property
    def output_dim(self) -> int:
        return self.output_op.shape[0]

    @property
    def system_matrix(self) -> np.ndarray:
        return np.block([[self.state_op, self.input_op], [self.output_op, self.feed_op]])

    @classmethod
    def static(cls, d) -> "LinearSystem":
        """A system with zero-dimensional state and constant transfer function ``d``."""
        d = as_operator(d, name="D")
        return cls(np.zeros((0, 0)), np.zeros((0, d.shape[1])), np.zeros((d.shape[0], 0)), d)


@dataclass(frozen=True)
class TruncatedHardyOperator:
    """Compression of a Hardy-space operator to coefficients of degree <= K.

    Output coordinates are ordered degree-major: the first ``out_dim`` rows
    are the constant term.  ``in_dim`` is None when the domain is a plain
    coefficient space rather than a Hardy space.
    """

    matrix: np.ndarray
    K: int
    out_dim: int
    in_dim: int | None = None

    def block(self, i: int, j: int = 0) -> np.ndarray:
        cols = self.matrix.shape[1] if self.in_dim is None else self.in_dim
        r = slice(i * self.out_dim, (i + 1) * self.out_dim)
        c = slice(j * cols, (j + 1) * cols)
        return self.matrix[r, c]

    def norm(self) -> float:
        return opnorm(self.matrix)


def block_toeplitz(coeffs, out_dim: int, in_dim: int) -> np.ndarray:
    """Block lower-triangular Toeplitz matrix with first block column ``coeffs``."""
    n = len(coeffs)
    out = np.zeros((n * out_dim, n * in_dim), dtype=complex)
    for i in range(n):
        for j in range(i + 1):
            out[i * out_dim:(i + 1) * out_dim, j * in_dim:(j + 1) * in_dim] = coeffs[i - j]
    return out


def _resolvent_matrix(z: np.ndarray, lam: complex) -> np.ndarray:
    if abs(lam) >= 1:
        raise ValueError("evaluation point must lie in the open unit disc")
    m = np.eye(z.shape[0]) - lam * z
    # |I - lam Z| <= 2 for a contraction, so a tiny smallest singular value is singularity
    if z.shape[0] and np.linalg.svd(m, compute_uv=False).min() * _COND_LIMIT < 1:
        raise ResolventSingular(f"I - lam Z is singular at lam={lam}")
    return m


def transfer_eval(sys: LinearSystem, lam: complex) -> np.ndarray:
    """Value of the transfer function at a point of the open disc."""
    if sys.state_dim == 0:
        return sys.feed_op.copy()
    m = _resolvent_matrix(sys.state_op, lam)
    return sys.feed_op + lam * sys.output_op @ np.linalg.solve(m, sys.input_op)


def observability_eval(sys: LinearSystem, lam: complex) -> np.ndarray:
    """Value of ``C (I - lam Z)^{-1}`` at a point of the open disc."""
    if sys.state_dim == 0:
        return sys.output_op.copy()
    m = _resolvent_matrix(sys.state_op, lam)
    return np.linalg.solve(m.T, sys.output_op.T).T


def taylor(sys: LinearSystem, n: int):
    """Taylor coefficients of degree 0..n of the transfer and observability functions."""
    f = [sys.feed_op.copy()]
    w = [sys.output_op.copy()]
    p = sys.output_op
    for _ in range(n):
        f.append(p @ sys.input_op)
        p = p @ sys.state_op
        w.append(p)
    return f, w


def truncated_ops(sys: LinearSystem, K: int):
    """Truncated multiplication operator of the transfer function and the
    truncated observability operator."""
    f, w = taylor(sys, K)
    mf = TruncatedHardyOperator(block_toeplitz(f, sys.output_dim, sys.input_dim),
                                K, sys.output_dim, sys.input_dim)
    gw = TruncatedHardyOperator(np.vstack(w) if w else np.zeros((0, sys.state_dim)),
                                K, sys.output_dim, None)
    return mf, gw


def strong_stability(z, tol: ToleranceConfig = DEFAULT_TOL):
    """Return ``(rho(Z) < 1 - rank_tol, rho(Z))``."""
    z = as_operator(z, name="Z")
    if z.shape[0] == 0:
        return True, 0.0
    rho = float(np.max(np.abs(np.linalg.eigvals(z))))
    return rho < 1 - tol.rank_tol, rho


def coisometry_defect(sys: LinearSystem) -> float:
    m = sys.system_matrix
    return opnorm(m @ adjoint(m) - np.eye(m.shape[0]))


def _observability_stack(sys: LinearSystem, K: int) -> np.ndarray:
    return truncated_ops(sys, K)[1].matrix


def observable_reduction(sys: LinearSystem, tol: ToleranceConfig = DEFAULT_TOL) -> LinearSystem:
    """Compress a co-isometric system to the orthogonal complement of its
    unobservable subspace.  The transfer function is unchanged."""
    res = coisometry_defect(sys)
    if res > tol.check_tol:
        raise NotCoisometric(f"system matrix co-isometry defect {res:.3e}", residual=res)
    n = sys.state_dim
    if n == 0:
        return sys
    obs = _observability_stack(sys, n - 1)
    p = range_basis(adjoint(obs), tol)
    return LinearSystem(adjoint(p) @ sys.state_op @ p, adjoint(p) @ sys.input_op,
                        sys.output_op @ p, sys.feed_op)


def _check_observable(sys: LinearSystem, tol: ToleranceConfig):
    n = sys.state_dim
    if n == 0:
        return
    obs = _observability_stack(sys, n - 1)
    if range_basis(adjoint(obs), tol).shape[1] < n:
        raise NotObservable("system has a nontrivial unobservable subspace")


def unitary_equivalence(sys1: LinearSystem, sys2: LinearSystem,
                        tol: ToleranceConfig = DEFAULT_TOL):
    """Unitary ``Theta`` with ``Theta Z1 = Z2 Theta``, ``C1 = C2 Theta``,
    ``Theta B1 = B2`` and ``D1 = D2``, or None when the transfer functions differ.

    Both systems must be observable with co-isometric system matrices.
    """
    for s in (sys1, sys2):
        res = coisometry_defect(s)
        if res > tol.check_tol:
            raise NotCoisometric(f"co-isometry defect {res:.3e}", residual=res)
        _check_observable(s, tol)
    if (sys1.input_dim, sys1.output_dim) != (sys2.input_dim, sys2.output_dim):
        raise ShapeMismatch("systems act between different spaces")
    n1, n2 = sys1.state_dim, sys2.state_dim
    f1, _ = taylor(sys1, n1 + n2)
    f2, _ = taylor(sys2, n1 + n2)
    if max(opnorm(a - b) for a, b in zip(f1, f2)) > tol.check_tol:
        return None
    if n1 != n2:
        return None
    if n1 == 0:
        return np.zeros((0, 0), dtype=complex)
    K = n1
    g1 = _observability_stack(sys1, K)
    g2 = _observability_stack(sys2, K)
    theta = polar_unitary(pinv(g2, tol) @ g1)
    resid = max(opnorm(theta @ sys1.state_op - sys2.state_op @ theta),
                opnorm(sys1.output_op - sys2.output_op @ theta),
                opnorm(theta @ sys1.input_op - sys2.input_op))
    if resid > tol.check_tol:
        return None
    return theta
