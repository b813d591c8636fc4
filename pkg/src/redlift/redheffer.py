"""Redheffer quadruples, the linear-fractional transform and related operators.

A quadruple is stored as one realized system with state space ``U``, input
space ``E'`` and output space ``E (+) Y``.  Its transfer function supplies the
blocks ``psi11`` (rows in ``E``) and ``psi21`` (rows in ``Y``); its
observability function supplies ``psi12`` and ``psi22``.  For a Schur
parameter ``V`` from ``E`` to ``E'`` the transform is

    H_V = psi22 + psi21 V (I - psi11 V)^{-1} psi12.

All Hardy-space operators are compressed to coefficient degrees ``0..K``.
Every operator involved is block lower triangular in degree, so the
compression of a product is the product of compressions.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import (BadDims, FeedbackSingular, FeedthroughNonzero,
                     FractionSingular, NotOpenBall, ShapeMismatch)
from .opcore import (DEFAULT_TOL, BlockOperator, ToleranceConfig, adjoint,
                     as_operator, defect, opnorm)
from .systems import (LinearSystem, TruncatedHardyOperator, block_toeplitz,
                      observability_eval, taylor, transfer_eval)

__all__ = [
    "RedhefferQuadruple", "SchurParameter", "transform_eval", "gamma_HV",
    "coefficient_matrix", "isometry_defect", "redheffer_product", "rotation",
    "K_V", "range_singleton_check", "noninjectivity_witness", "constant_grid",
    "max_principle_suite", "kernel_inclusion_check", "bounds_check",
    "SingletonReport", "MaxPrincipleReport", "KernelInclusionReport", "BoundsReport",
]

_COND_LIMIT = 1e12


@dataclass(frozen=True)
class RedhefferQuadruple:
    realization: LinearSystem
    split_index: int

    def __post_init__(self):
        if not 0 <= self.split_index <= self.realization.output_dim:
            raise BadDims("split index outside the output space")
        top = self.realization.feed_op[:self.split_index]
        if opnorm(top) > DEFAULT_TOL.check_tol:
            raise FeedthroughNonzero(f"psi11(0) has norm {opnorm(top):.3e}", residual=opnorm(top))

    @property
    def dim_u(self) -> int:
        return self.realization.state_dim

    @property
    def dim_e(self) -> int:
        return self.split_index

    @property
    def dim_y(self) -> int:
        return self.realization.output_dim - self.split_index

    @property
    def dim_eprime(self) -> int:
        return self.realization.input_dim

    @property
    def space_dims(self):
        return self.dim_u, self.dim_y, self.dim_e, self.dim_eprime

    def evaluate(self, lam: complex):
        """Return ``(psi11, psi12, psi21, psi22)`` at ``lam``."""
        e = self.split_index
        f = transfer_eval(self.realization, lam)
        w = observability_eval(self.realization, lam)
        return f[:e], w[:e], f[e:], w[e:]

    def coefficients(self, K: int):
        """Taylor coefficients of degree 0..K, as four lists."""
        e = self.split_index
        f, w = taylor(self.realization, K)
        return ([c[:e] for c in f], [c[:e] for c in w],
                [c[e:] for c in f], [c[e:] for c in w])

    def truncated(self, K: int):
        """Compressions ``(M11, G12, M21, G22)`` at degree K, as arrays."""
        f11, w12, f21, w22 = self.coefficients(K)
        u, y, e, ep = self.space_dims
        m11 = block_toeplitz(f11, e, ep)
        m21 = block_toeplitz(f21, y, ep)
        g12 = np.vstack(w12) if e else np.zeros((0, u), dtype=complex)
        g22 = np.vstack(w22) if y else np.zeros((0, u), dtype=complex)
        return m11, g12, m21, g22


@dataclass(frozen=True)
class SchurParameter:
    """Contractive analytic function from ``E`` to ``E'``, realized by a system.

    Constant parameters are systems with zero-dimensional state.
    ``open_ball`` records whether the truncated multiplication norm at the
    admission degree was at most ``1 - norm_slack``.
    """

    system: LinearSystem
    open_ball: bool
    admission_K: int = 16

    @classmethod
    def constant(cls, value, tol: ToleranceConfig = DEFAULT_TOL) -> "SchurParameter":
        v = as_operator(value, name="V")
        return cls(LinearSystem.static(v), opnorm(v) <= 1 - tol.norm_slack, 0)

    @classmethod
    def realized(cls, system: LinearSystem, K: int = 16,
                 tol: ToleranceConfig = DEFAULT_TOL) -> "SchurParameter":
        mv = block_toeplitz(taylor(system, K)[0], system.output_dim, system.input_dim)
        return cls(system, opnorm(mv) <= 1 - tol.norm_slack, K)

    @property
    def is_constant(self) -> bool:
        return self.system.state_dim == 0

    @property
    def dim_in(self) -> int:
        return self.system.input_dim

    @property
    def dim_out(self) -> int:
        return self.system.output_dim

    def value(self, lam: complex) -> np.ndarray:
        return transfer_eval(self.system, lam)

    def multiplication(self, K: int) -> np.ndarray:
        return block_toeplitz(taylor(self.system, K)[0], self.dim_out, self.dim_in)


def _check_compatible(psi: RedhefferQuadruple, v: SchurParameter):
    if v.dim_in != psi.dim_e or v.dim_out != psi.dim_eprime:
        raise ShapeMismatch(
            f"parameter maps C^{v.dim_in} -> C^{v.dim_out}, "
            f"quadruple needs C^{psi.dim_e} -> C^{psi.dim_eprime}")


def _open_ball_mult(v: SchurParameter, K: int, tol: ToleranceConfig) -> np.ndarray:
    mv = v.multiplication(K)
    m = opnorm(mv)
    if m > 1 - tol.norm_slack:
        raise NotOpenBall(f"truncated multiplication norm {m:.9f}", residual=m)
    return mv


def transform_eval(psi: RedhefferQuadruple, v: SchurParameter, lam: complex) -> np.ndarray:
    """Value of ``H_V`` at ``lam``."""
    _check_compatible(psi, v)
    p11, p12, p21, p22 = psi.evaluate(lam)
    vv = v.value(lam)
    m = np.eye(psi.dim_e) - p11 @ vv
    if psi.dim_e and np.linalg.cond(m) > _COND_LIMIT:
        raise FractionSingular(f"I - psi11 V is singular at lam={lam}")
    return p22 + p21 @ vv @ np.linalg.solve(m, p12)


def _gamma(m11, g12, m21, g22, mv):
    n = m11.shape[0]
    x = np.linalg.solve(np.eye(n) - m11 @ mv, g12) if n else g12
    return g22 + m21 @ mv @ x


def gamma_HV(psi: RedhefferQuadruple, v: SchurParameter, K: int,
             tol: ToleranceConfig = DEFAULT_TOL, require_open_ball: bool = True) -> TruncatedHardyOperator:
    """Truncated observability-type operator of ``H_V``: maps ``U`` to
    coefficient sequences of degree <= K in ``Y``."""
    _check_compatible(psi, v)
    mv = _open_ball_mult(v, K, tol) if require_open_ball else v.multiplication(K)
    g = _gamma(*psi.truncated(K), mv)
    return TruncatedHardyOperator(g, K, psi.dim_y, None)


def coefficient_matrix(psi: RedhefferQuadruple, K: int, out_degree: int | None = None) -> BlockOperator:
    """``[[M11, G12], [M21, G22]]`` with inputs of degree <= K.

    With ``out_degree = L > K`` the outputs are kept up to degree L, which
    gives the compression used to measure how far the operator is from an
    isometry.  The square truncation (``L = K``) is a co-isometry whenever
    the realization is.
    """
    L = K if out_degree is None else out_degree
    if L < K:
        raise ValueError("out_degree must be at least K")
    m11, g12, m21, g22 = psi.truncated(L)
    ncol = (K + 1) * psi.dim_eprime
    return BlockOperator.from_blocks(m11[:, :ncol], g12, m21[:, :ncol], g22)


def isometry_defect(psi: RedhefferQuadruple, K: int) -> float:
    """``|I - K0* K0|`` for inputs of degree <= K and outputs of degree <= 2K+1.

    The square truncation drops the tails of high-degree columns and never
    becomes isometric; doubling the output degree leaves a tail that decays
    geometrically when the realization is unitary and strongly stable.
    """
    k0 = coefficient_matrix(psi, K, 2 * K + 1).matrix
    return opnorm(adjoint(k0) @ k0 - np.eye(k0.shape[1]))


def redheffer_product(m1: BlockOperator, m2: BlockOperator,
                      tol: ToleranceConfig = DEFAULT_TOL) -> BlockOperator:
    """Feedback connection of ``m1: X + U1 -> X' + Y1`` with ``m2: X' + U2 -> X + Y2``.

    The result maps ``U1 + U2`` to ``Y1 + Y2``.
    """
    z1, b1, c1, d1 = m1.blocks
    z2, b2, c2, d2 = m2.blocks
    if z2.shape != (z1.shape[1], z1.shape[0]):
        raise ShapeMismatch("state blocks are not compatible for feedback")
    x, xp = z1.shape[1], z1.shape[0]
    l1 = np.eye(xp) - z1 @ z2
    l2 = np.eye(x) - z2 @ z1
    if x and np.linalg.svd(l2, compute_uv=False).min() * _COND_LIMIT < 1:
        raise FeedbackSingular("I - Z2 Z1 is numerically singular")
    l1_b1 = np.linalg.solve(l1, b1) if xp else b1
    l2_b2 = np.linalg.solve(l2, b2) if x else b2
    tl = d1 + c1 @ z2 @ l1_b1
    tr = c1 @ l2_b2
    bl = c2 @ l1_b1
    br = d2 + c2 @ z1 @ l2_b2
    return BlockOperator.from_blocks(tl, tr, bl, br)


def rotation(v: SchurParameter, K: int, tol: ToleranceConfig = DEFAULT_TOL) -> BlockOperator:
    """Unitary ``[[M_V, D_{M_V*}], [-D_{M_V}, M_V*]]`` on truncated spaces.

    Rows are ``H2(E') + H2(E)``, columns ``H2(E) + H2(E')``.
    """
    mv = _open_ball_mult(v, K, tol)
    dv = defect(mv, tol).defect_operator
    dvs = defect(adjoint(mv), tol).defect_operator
    return BlockOperator.from_blocks(mv, dvs, -dv, adjoint(mv))


def K_V(psi: RedhefferQuadruple, v: SchurParameter, K: int,
        tol: ToleranceConfig = DEFAULT_TOL) -> BlockOperator:
    """Closed-form blocks of the feedback connection of the rotation with the
    coefficient matrix.  Maps ``H2(E') + U`` into ``H2(E) + H2(Y)``."""
    _check_compatible(psi, v)
    mv = _open_ball_mult(v, K, tol)
    m11, g12, m21, g22 = psi.truncated(K)
    dv = defect(mv, tol).defect_operator
    dvs = defect(adjoint(mv), tol).defect_operator
    ne, nep = m11.shape
    x = np.eye(ne) - m11 @ mv
    y = np.eye(nep) - mv @ m11
    tl = adjoint(mv) - dv @ np.linalg.solve(x, m11 @ dvs)
    tr = -dv @ np.linalg.solve(x, g12)
    bl = m21 @ np.linalg.solve(y, dvs)
    br = _gamma(m11, g12, m21, g22, mv)
    return BlockOperator.from_blocks(tl, tr, bl, br)


def constant_grid(dim_in: int, dim_out: int):
    """Constant parameters ``0`` and ``c E_ij`` for ``c`` in {1/2, -1/2, i/2, -i/2}."""
    grid = [np.zeros((dim_out, dim_in), dtype=complex)]
    for i, j in itertools.product(range(dim_out), range(dim_in)):
        for c in (0.5, -0.5, 0.5j, -0.5j):
            m = np.zeros((dim_out, dim_in), dtype=complex)
            m[i, j] = c
            grid.append(m)
    return grid


def _grid_gammas(psi, K, tol):
    out = []
    for m in constant_grid(psi.dim_e, psi.dim_eprime):
        v = SchurParameter.constant(m, tol)
        out.append((m, gamma_HV(psi, v, K, tol).matrix))
    return out


@dataclass
class SingletonReport:
    singleton: bool
    psi12_vanishes: bool
    psi21_vanishes: bool
    coisometric_criterion: bool | None
    witness: tuple | None = None


def range_singleton_check(psi: RedhefferQuadruple, K: int,
                          tol: ToleranceConfig = DEFAULT_TOL) -> SingletonReport:
    """Decide whether all parameters give the same ``H_V`` up to degree K.

    When they do not, ``witness`` holds two constant parameters whose
    transforms have different coefficients.
    """
    m11, g12, m21, g22 = psi.truncated(K)
    z12 = opnorm(g12) <= tol.check_tol
    z21 = opnorm(m21) <= tol.check_tol
    singleton = z12 or z21
    coiso = None
    k0 = coefficient_matrix(psi, K).matrix
    if opnorm(k0 @ adjoint(k0) - np.eye(k0.shape[0])) <= tol.check_tol:
        gg = g22 @ adjoint(g22)
        coiso = psi.dim_e == 0 or opnorm(gg - np.eye(gg.shape[0])) <= tol.check_tol
    witness = None
    if not singleton:
        gam = _grid_gammas(psi, K, tol)
        for (a, ga), (b, gb) in itertools.combinations(gam, 2):
            if opnorm(ga - gb) > tol.norm_slack:
                witness = (a, b)
                break
    return SingletonReport(singleton, z12, z21, coiso, witness)


def noninjectivity_witness(psi: RedhefferQuadruple, K: int,
                           tol: ToleranceConfig = DEFAULT_TOL):
    """Two distinct constant grid parameters with equal ``H_V`` up to degree K, or None."""
    gam = _grid_gammas(psi, K, tol)
    for (a, ga), (b, gb) in itertools.combinations(gam, 2):
        if opnorm(ga - gb) <= tol.check_tol:
            return a, b
    return None


@dataclass
class MaxPrincipleReport:
    norms: list
    degrees: list
    norms_by_degree: list
    strict: bool
    delta: float
    norm_one: bool
    monotone_in_K: bool
    spread: float = 0.0
    check_tol: float = DEFAULT_TOL.check_tol

    @property
    def dichotomy_holds(self) -> bool:
        """All norms share a strict bound below 1, or all sit at one common value."""
        return self.strict or self.norm_one or self.spread <= self.check_tol


def max_principle_suite(psi: RedhefferQuadruple, samples, K: int,
                        tol: ToleranceConfig = DEFAULT_TOL) -> MaxPrincipleReport:
    """Truncated norms of ``Gamma_{H_V}`` for each sample, with the
    strict-or-all-one dichotomy and monotonicity in the truncation degree."""
    degrees = sorted({max(K // 4, 0), max(K // 2, 0), K})
    by_degree = []
    for v in samples:
        by_degree.append([gamma_HV(psi, v, k, tol).norm() for k in degrees])
    norms = [row[-1] for row in by_degree]
    top = max(norms) if norms else 0.0
    delta = 1.0 - top
    strict = bool(norms) and delta >= tol.norm_slack
    norm_one = bool(norms) and all(abs(n - 1.0) <= tol.check_tol for n in norms)
    monotone = all(b >= a - tol.check_tol for row in by_degree for a, b in zip(row, row[1:]))
    spread = (max(norms) - min(norms)) if norms else 0.0
    return MaxPrincipleReport(norms, degrees, by_degree, strict, delta, norm_one, monotone,
                              spread, tol.check_tol)


def _isometric_directions(g: np.ndarray, tol: ToleranceConfig) -> np.ndarray:
    n = g.shape[1]
    if g.shape[0] == 0:
        return np.zeros((n, 0), dtype=complex)
    _, s, vh = np.linalg.svd(g, full_matrices=True)
    s = np.concatenate([s, np.zeros(n - len(s))])
    keep = np.abs(1.0 - s ** 2) <= tol.check_tol
    return adjoint(vh[keep])


@dataclass
class KernelInclusionReport:
    holds: bool
    kernel: np.ndarray
    residual: float
    psi12_residual: float
    mechanism_residual: float


def kernel_inclusion_check(psi: RedhefferQuadruple, v: SchurParameter, vt: SchurParameter,
                           K: int, tol: ToleranceConfig = DEFAULT_TOL) -> KernelInclusionReport:
    """Check that the isometric directions of ``Gamma_{H_V}`` are isometric
    directions of ``Gamma_{H_Vt}``, and that they are annihilated by
    ``Gamma_{psi12}``."""
    g = gamma_HV(psi, v, K, tol).matrix
    gt = gamma_HV(psi, vt, K, tol, require_open_ball=False).matrix
    ker = _isometric_directions(g, tol)
    kert = _isometric_directions(gt, tol)
    _, g12, _, g22 = psi.truncated(K)
    if ker.shape[1] == 0:
        return KernelInclusionReport(True, ker, 0.0, 0.0, 0.0)
    resid = opnorm(ker - kert @ (adjoint(kert) @ ker))
    r12 = opnorm(g12 @ ker)
    mech = opnorm(gt @ ker - g22 @ ker)
    holds = resid <= tol.check_tol and r12 <= tol.check_tol and mech <= tol.check_tol
    return KernelInclusionReport(holds, ker, resid, r12, mech)


@dataclass
class BoundsReport:
    lhs: float
    rhs1: float
    rhs2: float
    rhs3: float | None
    isometry_defect: float
    holds: bool
    note: str = ""
    slacks: dict = field(default_factory=dict)


def bounds_check(psi: RedhefferQuadruple, v: SchurParameter, u, K: int,
                 tol: ToleranceConfig = DEFAULT_TOL, slack: float = 1e-10) -> BoundsReport:
    """Evaluate the three upper bounds for ``|Gamma_{H_V} u|^2``.

    The third bound needs the state column ``[G12; G22]`` to be isometric at
    degree K; when it is not, ``rhs3`` is None and ``note`` says why.
    """
    u = np.asarray(u, dtype=complex).reshape(-1)
    if u.shape[0] != psi.dim_u:
        raise ShapeMismatch("vector does not live in the state space")
    mv = _open_ball_mult(v, K, tol)
    m11, g12, m21, g22 = psi.truncated(K)
    m = opnorm(mv)
    ne = m11.shape[0]
    nn = opnorm(np.eye(ne) - m11 @ mv) if ne else 1.0
    uu = float(np.vdot(u, u).real)
    a12 = float(np.linalg.norm(g12 @ u) ** 2)
    a22 = float(np.linalg.norm(g22 @ u) ** 2)
    lhs = float(np.linalg.norm(_gamma(m11, g12, m21, g22, mv) @ u) ** 2)
    rhs1 = uu - (1 - m * m) / nn ** 2 * a12
    c = (1 - m) / (1 + m)
    rhs2 = uu - c * a12
    col = np.vstack([g12, g22])
    idef = opnorm(adjoint(col) @ col - np.eye(psi.dim_u)) if psi.dim_u else 0.0
    rhs3, note = None, ""
    if idef <= tol.check_tol:
        rhs3 = 2 * m / (1 + m) * uu + c * a22
    else:
        note = f"NotIsometric: state column defect {idef:.3e}"
    slacks = {"rhs1": rhs1 - lhs, "rhs2": rhs2 - lhs}
    if rhs3 is not None:
        slacks["rhs3"] = rhs3 - lhs
    holds = all(s >= -slack for s in slacks.values()) and rhs1 <= rhs2 + slack
    return BoundsReport(lhs, rhs1, rhs2, rhs3, idef, holds, note, slacks)
