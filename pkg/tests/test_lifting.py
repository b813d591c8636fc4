import numpy as np
import pytest
from hypothesis import given, strategies as st

from redlift.errors import InconsistentData, NotCoisometric, ShapeMismatch
from redlift.generators import (dressed_normal_form, make_rng, random_data_set,
                                random_isometry, random_omega, random_omega_data_set,
                                random_schur_parameter, random_unitary)
from redlift.lifting import (ContractiveInterpolant, LiftingDataSet, UnderlyingContraction,
                             density_diagnostic, interpolant, inverse_construction, omega_B,
                             omega_equivalence, omega_to_data_set, phi_closed_form, phi_coeffs,
                             schaffer_lifting, singleton_check, underlying_contraction, validate,
                             verify_interpolant)
from redlift.opcore import adjoint, classify, opnorm
from redlift.redheffer import SchurParameter
from redlift.systems import LinearSystem, TruncatedHardyOperator, taylor

R3 = np.sqrt(3) / 2


def scalar_omega():
    return UnderlyingContraction(np.array([[R3]]), np.array([[0.5]]), np.eye(1))


def test_validate_classical_shape(rng):
    # R = I, Q isometry and T' A = A Q
    q = random_unitary(rng, 3)
    a = 0.7 * np.eye(3)
    data = LiftingDataSet(a, q, np.eye(3), q)
    assert validate(data).passed


def test_validate_relaxed_shift_shape():
    # R = [I; 0], Q = [0; I] on C^1 -> C^2, A = [a0 a1] with T' A R = A Q
    a = np.array([[0.5, 0.25]])
    data = LiftingDataSet(a, np.array([[0.5]]), np.array([[1.0], [0.0]]), np.array([[0.0], [1.0]]))
    assert validate(data).passed


def test_validate_order_failure():
    data = LiftingDataSet(np.zeros((1, 2)), np.zeros((1, 1)), np.array([[1.0], [0.0]]), np.zeros((2, 1)))
    rep = validate(data)
    assert not rep["intertwining:order"].passed


def test_schaffer_examples(rng):
    t = random_isometry(rng, 2, 2)
    u = schaffer_lifting(t, 3).matrix
    assert u.shape == (2, 2) and opnorm(u - t) <= 1e-14
    u = schaffer_lifting(np.zeros((1, 1)), 2).matrix
    expect = np.zeros((4, 4))
    expect[1, 0] = 1
    expect[2, 1] = expect[3, 2] = 1
    assert np.allclose(u, expect)
    # isometric on all but the top degree
    assert opnorm((adjoint(u) @ u - np.eye(4))[:3, :3]) <= 1e-14
    t = 0.8 * random_unitary(rng, 2)
    u = schaffer_lifting(t, 4).matrix
    assert opnorm(u[:2, :2] - t) == 0 and opnorm(u[:2, 2:]) == 0


def test_underlying_contraction_zero_A(rng):
    q = random_isometry(rng, 3, 2)
    data = LiftingDataSet(np.zeros((1, 3)), np.zeros((1, 1)), q @ (0.5 * np.eye(2)), q)
    om = underlying_contraction(data)
    assert opnorm(om.omega1) <= 1e-14 and om.dim_F == 2


@given(st.integers(0, 2**32 - 1), st.integers(1, 3), st.integers(1, 4), st.data())
def test_omega_roundtrip(seed, d, a, data):
    f = data.draw(st.integers(0, a))
    rng = make_rng(seed)
    om = random_omega(rng, d, a, f, isometric=data.draw(st.booleans()))
    back = underlying_contraction(omega_to_data_set(om))
    assert opnorm(back.omega - om.omega) <= 1e-12
    assert opnorm(back.F_embedding - om.F_embedding) <= 1e-12


@given(st.integers(0, 2**32 - 1), st.booleans())
def test_random_data_is_valid_and_contractive(seed, iso):
    rng = make_rng(seed)
    data = random_data_set(rng, 2, 3, 2, isometric=iso)
    assert validate(data).passed
    om = underlying_contraction(data)
    assert classify(om.omega) in ("strict_contraction", "contraction", "isometry", "unitary")
    if iso:
        assert opnorm(adjoint(om.omega) @ om.omega - np.eye(om.dim_F)) <= 1e-9


def test_scalar_omega_data_set():
    data = omega_to_data_set(scalar_omega())
    assert data.dims[0] == 2
    rep = validate(data)
    assert rep.passed and rep["intertwining:equation"].residual == 0


def test_empty_F_data_set():
    om = UnderlyingContraction(np.zeros((1, 0)), np.zeros((2, 0)), np.zeros((2, 0)))
    data = omega_to_data_set(om)
    assert data.R.shape[1] == 0 and validate(data).passed


def test_phi_examples():
    psi = phi_coeffs(scalar_omega())
    assert psi.dim_e == 0
    lam = 0.3
    assert abs(psi.evaluate(lam)[3][0, 0] - R3 / (1 - lam / 2)) <= 1e-14
    _, w = taylor(psi.realization, 30)
    coef = np.array([x[0, 0] for x in w])
    assert np.allclose(coef, R3 * 0.5 ** np.arange(31))
    assert abs(np.sum(np.abs(coef) ** 2) - 1) <= 1e-12


def test_phi_trivial_F():
    om = UnderlyingContraction(np.zeros((1, 0)), np.zeros((2, 0)), np.zeros((2, 0)))
    psi = phi_coeffs(om)
    lam = 0.4 - 0.1j
    p11, p12, p21, p22 = psi.evaluate(lam)
    assert opnorm(p12 - np.eye(2)) <= 1e-14 and opnorm(p22) == 0
    # D_omega* is the identity on Y + D_A, so phi11 picks the D_A rows
    assert opnorm(p11 - lam * np.hstack([np.zeros((2, 1)), np.eye(2)])) <= 1e-14


@given(st.integers(0, 2**32 - 1))
def test_phi_matches_closed_form(seed):
    rng = make_rng(seed)
    om = random_omega(rng, 2, 3, 2)
    psi = phi_coeffs(om)
    for lam in (0.0, 0.5, -0.3 + 0.6j):
        for a, b in zip(psi.evaluate(lam), phi_closed_form(om, lam)):
            assert opnorm(a - b) <= 1e-12


def test_interpolant_isometric_A(rng):
    a = random_isometry(rng, 3, 3)
    data = LiftingDataSet(a, np.zeros((3, 3)), np.zeros((3, 1)), np.zeros((3, 1)))
    b = interpolant(data, K=4)
    assert opnorm(b.matrix[:3] - a) <= 1e-14 and opnorm(b.matrix[3:]) == 0
    assert verify_interpolant(b, data).passed


@given(st.integers(0, 2**32 - 1), st.booleans(), st.integers(0, 2))
def test_interpolant_verifies(seed, iso, state):
    rng = make_rng(seed)
    data = random_omega_data_set(rng, 2, 3, 2, dress=True, K=8, isometric=iso)
    phi = phi_coeffs(underlying_contraction(data))
    for v in (None, random_schur_parameter(rng, phi.dim_e, phi.dim_eprime, 0.8, state)):
        b = interpolant(data, phi, v)
        rep = verify_interpolant(b, data)
        assert rep.passed, rep.summary
        assert opnorm(b.matrix[:data.A.shape[0]] - data.A) == 0


def test_interpolant_negative_control(rng):
    data = random_omega_data_set(rng, 2, 3, 2, K=6)
    b = interpolant(data)
    zero = TruncatedHardyOperator(np.zeros_like(b.Gamma.matrix), b.Gamma.K, b.Gamma.out_dim,
                                  b.Gamma.in_dim)
    bad = ContractiveInterpolant(b.A_part, zero, b.DA_map)
    assert verify_interpolant(bad, data)["interpolant:shift_identity"].residual > 1e-9


@given(st.integers(0, 2**32 - 1), st.booleans())
def test_omega_B_class(seed, iso):
    rng = make_rng(seed)
    data = random_omega_data_set(rng, 2, 3, 2, K=6, isometric=iso)
    phi = phi_coeffs(underlying_contraction(data))
    v = random_schur_parameter(rng, phi.dim_e, phi.dim_eprime, 0.6, 1, K=6)
    ob = omega_B(data, interpolant(data, phi, v))
    assert opnorm(ob.matrix) <= 1 + 1e-9
    assert ob.isometric == iso


def test_singleton_examples(rng):
    data = random_omega_data_set(rng, 2, 3, 3, K=6)
    assert singleton_check(data, interpolant(data))
    data = omega_to_data_set(scalar_omega(), 6)
    assert singleton_check(data, interpolant(data))
    om = UnderlyingContraction(np.zeros((1, 0)), np.zeros((2, 0)), np.zeros((2, 0)))
    data = omega_to_data_set(om, 4)
    phi = phi_coeffs(om)
    v = SchurParameter.constant(0.5 * np.ones((phi.dim_eprime, phi.dim_e)) / 2)
    assert not singleton_check(data, interpolant(data, phi, v))


def test_density_examples(rng):
    psi = phi_coeffs(random_omega(rng, 2, 3, 3))
    rep = density_diagnostic(psi, 4)
    assert all(rep.dense) and rep.ranks == [0] * 5
    om = UnderlyingContraction(np.zeros((1, 0)), np.zeros((1, 0)), np.zeros((1, 0)))
    rep = density_diagnostic(phi_coeffs(om), 4)
    assert rep.dense == [True, False, False, False, False]
    assert rep.ranks == [1] * 5
    om = random_omega(rng, 2, 2, 1, isometric=True, rho_range=(0.2, 0.9))
    rep = density_diagnostic(phi_coeffs(om), 5)
    assert rep.ranks == [min(2, k + 1) for k in range(6)]
    # dense while the rank can still keep up, never once K >= dim D_A
    assert rep.dense[:2] == [True, True] and not any(rep.dense[2:])
    assert rep.constants_residual <= 1e-9 and rep.shift_residual <= 1e-9


def test_inverse_normal_form(rng):
    om = random_omega(rng, 2, 3, 2)
    res = inverse_construction(phi_coeffs(om))
    assert opnorm(res.psi - np.eye(res.psi.shape[0])) <= 1e-10
    assert opnorm(res.phi - np.eye(res.phi.shape[0])) <= 1e-10
    assert opnorm(res.omega.omega - om.omega) <= 1e-10
    assert res.relation_residual <= 1e-9


@given(st.integers(0, 2**32 - 1), st.booleans())
def test_inverse_dressed(seed, iso):
    rng = make_rng(seed)
    om = random_omega(rng, 2, 3, 2, isometric=iso, rho_range=(0.0, 0.9) if iso else None)
    quad, psi0, phi0 = dressed_normal_form(rng, om)
    res = inverse_construction(quad)
    assert res.relation_residual <= 1e-9
    assert opnorm(res.omega.omega - om.omega) <= 1e-9
    assert res.phi_unitary == res.coefficient_unitary or not res.coefficient_unitary


def test_inverse_enlarged_input(rng):
    om = random_omega(rng, 2, 3, 2, isometric=True, rho_range=(0.0, 0.9))
    quad, _, phi0 = dressed_normal_form(rng, om, extra_inputs=1)
    res = inverse_construction(quad)
    assert not res.coefficient_unitary and not res.phi_unitary
    phi = res.phi
    assert opnorm(phi @ adjoint(phi) - np.eye(phi.shape[0])) <= 1e-9
    from redlift.opcore import kernel_basis
    ker = kernel_basis(phi)
    assert ker.shape[1] == 1
    for lam in (0.2, -0.5j):
        p11, _, p21, _ = quad.evaluate(lam)
        assert opnorm(p11 @ ker) <= 1e-9 and opnorm(p21 @ ker) <= 1e-9


def test_phi_unitary_without_unitary_coefficients(rng):
    # a non-isometric omega with square dressing: phi is unitary although K0 is not,
    # so unitarity of K0 is sufficient for a unitary phi but not necessary
    om = random_omega(rng, 2, 3, 2, norm=0.7)
    quad, _, _ = dressed_normal_form(rng, om)
    res = inverse_construction(quad)
    assert res.phi_unitary and not res.coefficient_unitary


def test_inverse_rejects_non_coisometric(rng):
    s = LinearSystem(0.5 * np.eye(1), [[0.5]], [[0.5], [0.5]], [[0.0], [0.3]])
    with pytest.raises(NotCoisometric) as err:
        inverse_construction(s, 1)
    assert err.value.residual > 0.1


def test_omega_equivalence_examples(rng):
    om = random_omega(rng, 2, 3, 2, norm=0.8)
    eq = omega_equivalence(om, om)
    assert opnorm(eq.theta - np.eye(3)) <= 1e-9
    # planted unitary that reduces F: a unitary on F plus identity on G
    fe, ge = om.F_embedding, om.G_embedding
    tf = random_unitary(rng, om.dim_F)
    theta0 = fe @ tf @ adjoint(fe) + ge @ adjoint(ge)
    conj = UnderlyingContraction(om.omega1 @ adjoint(fe) @ adjoint(theta0) @ fe,
                                 theta0 @ om.omega2 @ adjoint(fe) @ adjoint(theta0) @ fe, fe)
    eq = omega_equivalence(conj, om)
    assert eq is not None and opnorm(eq.theta - theta0) <= 1e-9
    other = random_omega(rng, 2, 3, 2, norm=0.8)
    other = UnderlyingContraction(other.omega1, other.omega2, om.F_embedding)
    assert omega_equivalence(om, other) is None


def test_shape_checks(rng):
    with pytest.raises(ShapeMismatch):
        LiftingDataSet(np.zeros((1, 2)), np.zeros((2, 2)), np.zeros((2, 1)), np.zeros((2, 1)))
    data = LiftingDataSet(np.zeros((1, 2)), np.zeros((1, 1)), np.eye(2), 0.1 * np.eye(2))
    with pytest.raises(InconsistentData):
        underlying_contraction(data)
