"""Lifting data sets, their underlying contraction and contractive interpolants.

A lifting data set ``{A, T', R, Q}`` consists of contractions ``A: H -> H'``
and ``T': H' -> H'`` and operators ``R, Q: H0 -> H`` with ``T' A R = A Q`` and
``R* R <= Q* Q``.  Its underlying contraction ``omega`` is defined on the
closure ``F`` of ``D_A Q H0`` by ``omega D_A Q = [D_T' A R; D_A R]`` and splits
into ``omega1`` (into ``D_T'``) and ``omega2`` (into ``D_A``).  The quadruple
built from ``omega`` parametrizes every contractive interpolant through the
linear-fractional transform.

Defect spaces are handled in the coordinates of ``DefectData.embedding``.
Hardy spaces are truncated at a shared degree ``K``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (FeedthroughNonzero, InconsistentData, KernelExtractionError,
                     NotCoisometric, ShapeMismatch)
from .opcore import (DEFAULT_TOL, BlockOperator, ToleranceConfig, adjoint,
                     as_operator, canonical_basis, classify, defect, kernel_basis,
                     opnorm, parrott_coisometry_solve, pinv, polar_unitary,
                     range_basis)
from .redheffer import RedhefferQuadruple, SchurParameter, gamma_HV
from .report import VerificationReport
from .systems import (LinearSystem, TruncatedHardyOperator, coisometry_defect,
                      strong_stability, truncated_ops)

__all__ = [
    "LiftingDataSet", "UnderlyingContraction", "ContractiveInterpolant",
    "validate", "schaffer_lifting", "underlying_contraction", "omega_to_data_set",
    "phi_coeffs", "phi_closed_form", "interpolant", "verify_interpolant", "omega_B",
    "singleton_check", "density_diagnostic", "inverse_construction",
    "omega_equivalence", "sample_points", "coefficient_unitary",
]


def sample_points(n: int = 10, radius: float = 0.85) -> np.ndarray:
    """Deterministic points in the open disc, spread by the golden angle."""
    k = np.arange(n)
    r = radius * np.sqrt((k + 0.5) / n)
    return r * np.exp(2j * np.pi * 0.6180339887498949 * k)


@dataclass(frozen=True)
class LiftingDataSet:
    A: np.ndarray
    Tprime: np.ndarray
    R: np.ndarray
    Q: np.ndarray
    K: int = 16

    def __post_init__(self):
        a = as_operator(self.A, name="A")
        hp, h = a.shape
        t = as_operator(self.Tprime, rows=hp, cols=hp, name="Tprime")
        r = as_operator(self.R, rows=h, name="R")
        q = as_operator(self.Q, rows=h, cols=r.shape[1], name="Q")
        for name, val in zip(("A", "Tprime", "R", "Q"), (a, t, r, q)):
            object.__setattr__(self, name, val)
        if self.K < 0:
            raise ValueError("K must be nonnegative")

    @property
    def dims(self):
        """``(dim H, dim H', dim H0)``."""
        return self.A.shape[1], self.A.shape[0], self.R.shape[1]

    def defects(self, tol: ToleranceConfig = DEFAULT_TOL):
        return defect(self.A, tol), defect(self.Tprime, tol)


@dataclass(frozen=True)
class UnderlyingContraction:
    """``omega = [omega1; omega2]`` on ``F``, in defect-space coordinates.

    ``F_embedding`` is an isometry from ``F`` coordinates into ``D_A``
    coordinates.
    """

    omega1: np.ndarray
    omega2: np.ndarray
    F_embedding: np.ndarray

    def __post_init__(self):
        fe = as_operator(self.F_embedding, name="F_embedding")
        a, f = fe.shape
        w1 = as_operator(self.omega1, cols=f, name="omega1")
        w2 = as_operator(self.omega2, rows=a, cols=f, name="omega2")
        for name, val in zip(("omega1", "omega2", "F_embedding"), (w1, w2, fe)):
            object.__setattr__(self, name, val)
        if f and opnorm(adjoint(fe) @ fe - np.eye(f)) > DEFAULT_TOL.check_tol:
            raise ShapeMismatch("F_embedding is not an isometry")

    @property
    def ambient_dims(self):
        """``(dim D_T', dim D_A)``."""
        return self.omega1.shape[0], self.F_embedding.shape[0]

    @property
    def dim_F(self) -> int:
        return self.F_embedding.shape[1]

    @property
    def omega(self) -> np.ndarray:
        return np.vstack([self.omega1, self.omega2])

    @property
    def G_embedding(self) -> np.ndarray:
        return kernel_basis(adjoint(self.F_embedding), canonical=True)

    def state_operator(self) -> np.ndarray:
        """``omega2 Pi_F`` as an operator on ``D_A``."""
        return self.omega2 @ adjoint(self.F_embedding)


@dataclass(frozen=True)
class ContractiveInterpolant:
    """``B = [A; Gamma D_A]`` with ``Gamma`` truncated at degree ``Gamma.K``.

    ``DA_map`` is ``D_A`` as a map from ``H`` into ``D_A`` coordinates.
    """

    A_part: np.ndarray
    Gamma: TruncatedHardyOperator
    DA_map: np.ndarray

    @property
    def matrix(self) -> np.ndarray:
        return np.vstack([self.A_part, self.Gamma.matrix @ self.DA_map])


def validate(data: LiftingDataSet, tol: ToleranceConfig = DEFAULT_TOL) -> VerificationReport:
    """Residuals of the intertwining relation, the order relation and
    contractivity of ``A`` and ``T'``."""
    rep = VerificationReport()
    a, t, r, q = data.A, data.Tprime, data.R, data.Q
    rep.add("intertwining:equation", opnorm(t @ a @ r - a @ q), tol.check_tol)
    gap = adjoint(q) @ q - adjoint(r) @ r
    lam_min = float(np.linalg.eigvalsh(0.5 * (gap + adjoint(gap))).min()) if gap.size else 0.0
    rep.add("intertwining:order", max(0.0, -lam_min), tol.check_tol)
    rep.add("contraction:A", max(0.0, opnorm(a) - 1), tol.check_tol)
    rep.add("contraction:Tprime", max(0.0, opnorm(t) - 1), tol.check_tol)
    return rep


def _shift(K: int, d: int) -> np.ndarray:
    return np.kron(np.eye(K + 1, k=-1), np.eye(d))


def schaffer_lifting(tprime, K: int, tol: ToleranceConfig = DEFAULT_TOL) -> BlockOperator:
    """``[[T', 0], [E D_T', S]]`` on ``H' + H2_K(D_T')``."""
    t = as_operator(tprime, name="Tprime")
    dt = defect(t, tol)
    d = dt.rank
    emb = np.zeros(((K + 1) * d, t.shape[0]), dtype=complex)
    emb[:d] = dt.coordinate_map
    return BlockOperator.from_blocks(t, np.zeros((t.shape[0], (K + 1) * d)), emb, _shift(K, d))


def underlying_contraction(data: LiftingDataSet, tol: ToleranceConfig = DEFAULT_TOL) -> UnderlyingContraction:
    da, dt = data.defects(tol)
    x = da.coordinate_map @ data.Q
    fb = range_basis(x, tol, canonical=True)
    coords = adjoint(fb) @ x
    y = np.vstack([dt.coordinate_map @ data.A @ data.R, da.coordinate_map @ data.R])
    w = y @ pinv(coords, tol)
    res = opnorm(w @ coords - y)
    if res > tol.check_tol:
        raise InconsistentData(f"omega is not well defined, residual {res:.3e}", residual=res)
    nrm = opnorm(w)
    if nrm > 1 + tol.check_tol:
        raise InconsistentData(f"omega has norm {nrm:.6g}", residual=nrm - 1)
    return UnderlyingContraction(w[:dt.rank], w[dt.rank:], fb)


def omega_to_data_set(omega: UnderlyingContraction, K: int = 16) -> LiftingDataSet:
    """Data set on ``H = Y + U`` with ``A = [I 0]``, ``T' = 0``, ``R = omega``
    and ``Q`` the embedding of ``F`` into the ``U`` slot."""
    d, a = omega.ambient_dims
    f = omega.dim_F
    A = np.hstack([np.eye(d), np.zeros((d, a))])
    Q = np.vstack([np.zeros((d, f)), omega.F_embedding])
    return LiftingDataSet(A, np.zeros((d, d)), omega.omega, Q, K)


def _omega_defect_columns(omega: UnderlyingContraction, tol: ToleranceConfig):
    ds = defect(adjoint(omega.omega), tol)
    return ds.defect_operator @ ds.embedding


def phi_coeffs(omega: UnderlyingContraction, tol: ToleranceConfig = DEFAULT_TOL,
               check_points: int = 3) -> RedhefferQuadruple:
    """Quadruple realized with state ``D_A``, input ``D_omega*`` and output ``G + D_T'``."""
    d, a = omega.ambient_dims
    fe, ge = omega.F_embedding, omega.G_embedding
    dc = _omega_defect_columns(omega, tol)
    z = omega.state_operator()
    b = dc[d:]
    c = np.vstack([adjoint(ge), omega.omega1 @ adjoint(fe)])
    dd = np.vstack([np.zeros((ge.shape[1], dc.shape[1])), dc[:d]])
    psi = RedhefferQuadruple(LinearSystem(z, b, c, dd), ge.shape[1])
    for lam in sample_points(check_points, 0.6):
        got = psi.evaluate(lam)
        want = phi_closed_form(omega, lam, tol)
        err = max(opnorm(g - w) for g, w in zip(got, want))
        if err > tol.check_tol:
            raise InconsistentData(f"realization disagrees with closed form by {err:.3e}", residual=err)
    return psi


def phi_closed_form(omega: UnderlyingContraction, lam: complex,
                    tol: ToleranceConfig = DEFAULT_TOL):
    """``(phi11, phi12, phi21, phi22)`` at ``lam`` from the explicit formulas."""
    d, a = omega.ambient_dims
    fe, ge = omega.F_embedding, omega.G_embedding
    pf = adjoint(fe)
    dc = _omega_defect_columns(omega, tol)
    res = np.linalg.inv(np.eye(a) - lam * omega.omega2 @ pf)
    p_u = dc[d:]
    p_y = dc[:d]
    phi11 = lam * adjoint(ge) @ res @ p_u
    phi12 = adjoint(ge) @ res
    phi21 = p_y + lam * omega.omega1 @ pf @ res @ p_u
    phi22 = omega.omega1 @ pf @ res
    return phi11, phi12, phi21, phi22


def _zero_parameter(psi: RedhefferQuadruple, tol):
    return SchurParameter.constant(np.zeros((psi.dim_eprime, psi.dim_e)), tol)


def interpolant(data: LiftingDataSet, phi: RedhefferQuadruple | None = None,
                v: SchurParameter | None = None, K: int | None = None,
                tol: ToleranceConfig = DEFAULT_TOL) -> ContractiveInterpolant:
    """``B_V = [A; Gamma_{H_V} D_A]``; ``v = None`` gives the central interpolant."""
    K = data.K if K is None else K
    if phi is None:
        phi = phi_coeffs(underlying_contraction(data, tol), tol)
    if v is None:
        v = _zero_parameter(phi, tol)
    da, _ = data.defects(tol)
    if phi.dim_u != da.rank:
        raise ShapeMismatch("quadruple state space does not match D_A")
    g = gamma_HV(phi, v, K, tol)
    return ContractiveInterpolant(data.A.copy(), g, da.coordinate_map)


def verify_interpolant(b: ContractiveInterpolant, data: LiftingDataSet, K: int | None = None,
                       tol: ToleranceConfig = DEFAULT_TOL) -> VerificationReport:
    """Projection identity, shift identity below the truncation edge and contractivity."""
    K = b.Gamma.K if K is None else K
    rep = VerificationReport()
    bm = b.matrix
    hp = data.A.shape[0]
    rep.add("interpolant:projection", opnorm(bm[:hp] - data.A), tol.check_tol)
    up = schaffer_lifting(data.Tprime, K, tol).matrix
    if up.shape[1] != bm.shape[0]:
        raise ShapeMismatch("interpolant and lifting have different truncations")
    d = (up.shape[0] - hp) // (K + 1)
    keep = hp + K * d
    diff = (up @ bm @ data.R - bm @ data.Q)[:keep]
    rep.add("interpolant:shift_identity", opnorm(diff), tol.check_tol)
    rep.add("interpolant:contraction", max(0.0, opnorm(bm) - 1), tol.check_tol)
    return rep


@dataclass
class OmegaB:
    """``omega_B`` from ``F_B`` (coordinates) into the defect space of the
    interpolant's ``Gamma`` truncated one degree lower."""

    matrix: np.ndarray
    F_B: np.ndarray
    domain_rank: int
    codomain_rank: int
    residual: float
    classification: str

    @property
    def isometric(self) -> bool:
        return self.classification in ("isometry", "unitary")

    @property
    def coisometric(self) -> bool:
        return self.classification in ("co_isometry", "unitary")


def omega_B(data: LiftingDataSet, b: ContractiveInterpolant,
            tol: ToleranceConfig = DEFAULT_TOL, omega: UnderlyingContraction | None = None) -> OmegaB:
    """Contraction ``omega_B`` with ``omega_B D_Gamma f = D_Gamma omega2 f`` on ``F``.

    At truncation degree K the left defect uses ``Gamma`` up to degree K and
    the right defect uses ``Gamma`` up to degree K-1.  With this pairing the
    norm identity behind the construction holds exactly at every K, so
    ``omega_B`` is isometric precisely when ``omega`` is.
    """
    if omega is None:
        omega = underlying_contraction(data, tol)
    K = b.Gamma.K
    g = b.Gamma.matrix
    d = b.Gamma.out_dim
    dk = defect(g, tol)
    dk1 = defect(g[:K * d], tol)
    x = dk.coordinate_map @ omega.F_embedding
    y = dk1.coordinate_map @ omega.omega2
    fb = range_basis(x, tol)
    coords = adjoint(fb) @ x
    wb = y @ pinv(coords, tol)
    res = opnorm(wb @ coords - y)
    if res > tol.check_tol:
        raise InconsistentData(f"omega_B is not well defined, residual {res:.3e}", residual=res)
    return OmegaB(wb, fb, dk.rank, dk1.rank, res, classify(wb, tol))


def singleton_check(data: LiftingDataSet, b: ContractiveInterpolant,
                    tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """True when ``F_B`` fills the defect space of ``Gamma`` or ``omega_B`` is a co-isometry."""
    ob = omega_B(data, b, tol)
    return ob.F_B.shape[1] == ob.domain_rank or ob.coisometric


@dataclass
class DensityReport:
    ranks: list
    required: list
    dense: list
    constants_residual: float
    shift_residual: float


def density_diagnostic(phi: RedhefferQuadruple, Kmax: int,
                       tol: ToleranceConfig = DEFAULT_TOL) -> DensityReport:
    """Rank of the truncated ``Gamma_{phi12}`` against ``(K+1) dim G`` for K <= Kmax.

    Also measures how far the truncated range is from containing the
    constants and from being invariant under the backward shift.
    """
    g = phi.dim_e
    g12_full = phi.truncated(Kmax)[1]
    ranks, required, dense = [], [], []
    for k in range(Kmax + 1):
        r = range_basis(g12_full[:(k + 1) * g], tol).shape[1]
        ranks.append(r)
        required.append((k + 1) * g)
        dense.append(r == (k + 1) * g)
    rng = range_basis(g12_full, tol)
    consts = np.zeros(((Kmax + 1) * g, g), dtype=complex)
    consts[:g] = np.eye(g)
    const_res = opnorm(consts - rng @ (adjoint(rng) @ consts)) if g else 0.0
    if Kmax >= 1 and g:
        # dropping the constant term of a truncated range element lands in
        # the range truncated one degree lower
        lower = range_basis(g12_full[:Kmax * g], tol)
        shifted = g12_full[g:]
        shift_res = opnorm(shifted - lower @ (adjoint(lower) @ shifted))
    else:
        shift_res = 0.0
    return DensityReport(ranks, required, dense, const_res, shift_res)


def coefficient_unitary(sys: LinearSystem, tol: ToleranceConfig = DEFAULT_TOL) -> bool:
    """Whether the full coefficient operator of a realization is unitary:
    unitary system matrix and strongly stable state operator."""
    return classify(sys.system_matrix, tol) == "unitary" and strong_stability(sys.state_op, tol)[0]


@dataclass
class InverseResult:
    data_set: LiftingDataSet
    omega: UnderlyingContraction
    psi: np.ndarray
    phi: np.ndarray
    relation_residual: float
    phi_unitary: bool
    coefficient_unitary: bool


def inverse_construction(n, split_index: int | None = None, K: int = 16,
                         tol: ToleranceConfig = DEFAULT_TOL, n_points: int = 10) -> InverseResult:
    """Recover a lifting data set whose quadruple matches a co-isometric realization.

    ``n`` is a RedhefferQuadruple or a LinearSystem together with
    ``split_index``.  The returned ``psi`` maps ``E`` onto ``G`` and ``phi``
    maps ``E'`` into ``D_omega*`` coordinates, with

        diag(psi, I) Psi(lam) = Phi(lam) diag(phi, I).
    """
    if isinstance(n, RedhefferQuadruple):
        sys, e = n.realization, n.split_index
    else:
        sys, e = n, split_index
    res = coisometry_defect(sys)
    if res > tol.check_tol:
        raise NotCoisometric(f"system matrix co-isometry defect {res:.3e}", residual=res)
    d1 = sys.feed_op[:e]
    if opnorm(d1) > tol.check_tol:
        raise FeedthroughNonzero(f"feedthrough into E has norm {opnorm(d1):.3e}", residual=opnorm(d1))
    quad = RedhefferQuadruple(sys, e)
    z, b = sys.state_op, sys.input_op
    c1, c2 = sys.output_op[:e], sys.output_op[e:]
    d2 = sys.feed_op[e:]
    cres = opnorm(c1 @ adjoint(c1) - np.eye(e)) if e else 0.0
    if cres > tol.check_tol:
        raise KernelExtractionError(f"C1 is not a co-isometry, defect {cres:.3e}", residual=cres)
    fb = kernel_basis(c1, tol, canonical=True) if e else canonical_basis(np.eye(sys.state_dim, dtype=complex))
    omega = UnderlyingContraction(c2 @ fb, z @ fb, fb)
    ge = omega.G_embedding
    psi = adjoint(ge) @ adjoint(c1)
    ds = defect(adjoint(omega.omega), tol)
    phi = parrott_coisometry_solve(ds, np.vstack([d2, b]), tol)
    red = phi_coeffs(omega, tol)
    rel = 0.0
    for lam in sample_points(n_points):
        p11, p12, p21, p22 = quad.evaluate(lam)
        f11, f12, f21, f22 = red.evaluate(lam)
        lhs = np.block([[psi @ p11, psi @ p12], [p21, p22]])
        rhs = np.block([[f11 @ phi, f12], [f21 @ phi, f22]])
        rel = max(rel, opnorm(lhs - rhs))
    if rel > tol.check_tol:
        raise InconsistentData(f"coefficient relation fails by {rel:.3e}", residual=rel)
    phi_unitary = phi.shape[0] == phi.shape[1] and classify(phi, tol) == "unitary"
    return InverseResult(omega_to_data_set(omega, K), omega, psi, phi, rel, phi_unitary,
                         coefficient_unitary(sys, tol))


@dataclass
class OmegaEquivalence:
    theta: np.ndarray
    reduces_F: float
    omega1_residual: float
    reading_right: float
    reading_left: float

    def readings(self, tol: ToleranceConfig = DEFAULT_TOL) -> dict:
        """Which placement of ``Theta`` in the ``omega2`` relation holds.

        ``right``: ``omega2 Pi_F Theta = Theta omega2' Pi_F``;
        ``left``: ``Theta omega2 Pi_F = omega2' Pi_F Theta``.
        """
        return {"right": self.reading_right <= tol.check_tol,
                "left": self.reading_left <= tol.check_tol}


def omega_equivalence(w: UnderlyingContraction, wp: UnderlyingContraction,
                      tol: ToleranceConfig = DEFAULT_TOL) -> OmegaEquivalence | None:
    """Unitary on ``D_A`` that reduces ``F`` and carries ``omega`` to ``omega'``.

    ``Theta`` is read off from the observability functions of the two
    realizations, ``Gamma_W Theta = Gamma_W'``; it is None when no unitary
    satisfies that relation.  The input spaces ``D_omega*`` of the two
    realizations carry unrelated coordinates, so the transfer functions are
    not compared directly.
    """
    fe, fpe = w.F_embedding, wp.F_embedding
    if w.ambient_dims != wp.ambient_dims or fe.shape != fpe.shape:
        raise ShapeMismatch("underlying contractions live on different spaces")
    pf = fe @ adjoint(fe)
    if opnorm(pf - fpe @ adjoint(fpe)) > tol.check_tol:
        raise ShapeMismatch("underlying contractions are defined on different subspaces")
    s1 = phi_coeffs(w, tol).realization
    s2 = phi_coeffs(wp, tol).realization
    a = s1.state_dim
    if a == 0:
        return OmegaEquivalence(np.zeros((0, 0), dtype=complex), 0.0, 0.0, 0.0, 0.0)
    g1 = truncated_ops(s1, a)[1].matrix
    g2 = truncated_ops(s2, a)[1].matrix
    theta = polar_unitary(pinv(g1, tol) @ g2)
    if opnorm(g1 @ theta - g2) > tol.check_tol or classify(theta, tol) != "unitary":
        return None
    # omega' is written in the F coordinates of omega, which are shared
    f_to_f = adjoint(fpe) @ fe
    w1p = wp.omega1 @ f_to_f
    w2p = wp.omega2 @ f_to_f
    qf = np.eye(a) - pf
    red = max(opnorm(qf @ theta @ pf), opnorm(qf @ adjoint(theta) @ pf))
    pfs = adjoint(fe)
    r1 = opnorm(w.omega1 @ pfs @ theta - w1p @ pfs)
    right = opnorm(w.omega2 @ pfs @ theta - theta @ w2p @ pfs)
    left = opnorm(theta @ w.omega2 @ pfs - w2p @ pfs @ theta)
    return OmegaEquivalence(theta, red, r1, right, left)
