"""Seeded random instances.

Randomness comes from numpy's PCG64 bit generator.  Gaussian entries are
produced by the Box-Muller transform from PCG64 uniform doubles rather than
numpy's ziggurat sampler, so a stream is reproducible from the documented
PCG64 output alone.
"""

from __future__ import annotations

import numpy as np

from .lifting import LiftingDataSet, UnderlyingContraction, omega_to_data_set, phi_coeffs
from .opcore import adjoint, canonical_basis, opnorm
from .redheffer import RedhefferQuadruple, SchurParameter
from .systems import LinearSystem, strong_stability


def make_rng(seed: int | None) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def gaussian(rng: np.random.Generator, shape, real: bool = False) -> np.ndarray:
    """Standard normal samples via Box-Muller; complex entries have unit-variance parts."""
    shape = tuple(np.atleast_1d(shape)) if not isinstance(shape, tuple) else shape
    u1 = 1.0 - rng.random(shape)
    u2 = rng.random(shape)
    r = np.sqrt(-2.0 * np.log(u1))
    if real:
        return r * np.cos(2 * np.pi * u2)
    return r * np.exp(2j * np.pi * u2)


def random_contraction(rng, m: int, n: int, norm: float = 0.9) -> np.ndarray:
    """Complex Gaussian matrix scaled to the given spectral norm."""
    g = gaussian(rng, (m, n))
    s = opnorm(g)
    return g * (norm / s) if s > 0 else g


def random_isometry(rng, m: int, n: int) -> np.ndarray:
    if n > m:
        raise ValueError("an isometry needs m >= n")
    if n == 0:
        return np.zeros((m, 0), dtype=complex)
    q, r = np.linalg.qr(gaussian(rng, (m, n)))
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_unitary(rng, n: int) -> np.ndarray:
    return random_isometry(rng, n, n)


def _msqrt_psd(h: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(0.5 * (h + adjoint(h)))
    return (v * np.sqrt(np.clip(w, 0, None))) @ adjoint(v)


def random_omega(rng, d: int, a: int, f: int, norm: float | None = None,
                 isometric: bool = False, rho_range=None, max_tries: int = 200) -> UnderlyingContraction:
    """Random underlying contraction on an ``f``-dimensional ``F`` inside ``C^a``.

    With ``isometric`` the map is an isometry; ``rho_range = (lo, hi)``
    rejection-samples the spectral radius of ``omega2 Pi_F``.
    """
    if f > a:
        raise ValueError("F cannot be larger than D_A")
    for _ in range(max_tries):
        fe = canonical_basis(random_isometry(rng, a, f))
        if isometric:
            if d >= f:
                s = rng.uniform(0.3, 0.95) if norm is None else norm
                w2 = random_contraction(rng, a, f, s)
                w1 = random_isometry(rng, d, f) @ _msqrt_psd(np.eye(f) - adjoint(w2) @ w2)
            else:
                w = random_isometry(rng, d + a, f)
                w1, w2 = w[:d], w[d:]
        else:
            s = rng.uniform(0.5, 0.95) if norm is None else norm
            w = random_contraction(rng, d + a, f, s)
            w1, w2 = w[:d], w[d:]
        om = UnderlyingContraction(w1, w2, fe)
        if rho_range is None:
            return om
        rho = strong_stability(om.state_operator())[1]
        if rho_range[0] <= rho <= rho_range[1]:
            return om
    raise RuntimeError("could not meet the spectral radius constraint")


def random_data_set(rng, hp: int, k: int, h0: int, a_norm: float = 0.9, t_norm: float = 0.8,
                    isometric: bool = False, K: int = 16) -> LiftingDataSet:
    """Data set with ``|A| = a_norm`` on ``H = C^(hp+k)``; needs ``k >= h0``.

    ``Q = A^+ T' A R + N S`` with ``N`` spanning ``ker A`` and
    ``S* S = R* R`` gives ``A Q = T' A R`` and ``Q* Q >= R* R``; with
    ``isometric`` the map ``T'`` is zero and the order relation is an equality.
    """
    if k < h0:
        raise ValueError("need dim ker A >= dim H0")
    h = hp + k
    a = random_contraction(rng, hp, h, a_norm)
    t = np.zeros((hp, hp), dtype=complex) if isometric else random_contraction(rng, hp, hp, t_norm)
    r = gaussian(rng, (h, h0)) / np.sqrt(2 * h)
    u, s, vh = np.linalg.svd(a)
    null = adjoint(vh[hp:])
    a_pinv = np.linalg.pinv(a)
    sroot = random_isometry(rng, k, h0) @ _msqrt_psd(adjoint(r) @ r)
    q = a_pinv @ t @ a @ r + null @ sroot
    return LiftingDataSet(a, t, r, q, K)


def dress_data_set(rng, data: LiftingDataSet) -> LiftingDataSet:
    """Conjugate a data set by random unitaries on ``H``, ``H'`` and ``H0``."""
    h, hp, h0 = data.dims
    uh, uhp, u0 = random_unitary(rng, h), random_unitary(rng, hp), random_unitary(rng, h0)
    return LiftingDataSet(uhp @ data.A @ adjoint(uh), uhp @ data.Tprime @ adjoint(uhp),
                          uh @ data.R @ u0, uh @ data.Q @ u0, data.K)


def random_omega_data_set(rng, d: int, a: int, f: int, dress: bool = False, K: int = 16,
                          **kw) -> LiftingDataSet:
    data = omega_to_data_set(random_omega(rng, d, a, f, **kw), K)
    return dress_data_set(rng, data) if dress else data


def random_coisometric_system(rng, n: int, m: int, p: int) -> LinearSystem:
    """System with a co-isometric system matrix; needs ``p <= m``."""
    if p > m:
        raise ValueError("a co-isometric system needs at least as many inputs as outputs")
    u = random_unitary(rng, n + m)[:n + p]
    return LinearSystem(u[:n, :n], u[:n, n:], u[n:, :n], u[n:, n:])


def random_contractive_system(rng, n: int, m: int, p: int, norm: float = 0.9) -> LinearSystem:
    mat = random_contraction(rng, n + p, n + m, norm)
    return LinearSystem(mat[:n, :n], mat[:n, n:], mat[n:, :n], mat[n:, n:])


def random_schur_parameter(rng, e_in: int, e_out: int, norm: float = 0.5,
                           state_dim: int = 0, K: int = 16) -> SchurParameter:
    """Constant (``state_dim = 0``) or realized parameter with ``|V|_inf <= norm``."""
    if state_dim == 0:
        return SchurParameter.constant(random_contraction(rng, e_out, e_in, norm))
    return SchurParameter.realized(random_contractive_system(rng, state_dim, e_in, e_out, norm), K)


def dressed_normal_form(rng, omega: UnderlyingContraction, extra_inputs: int = 0):
    """Quadruple of ``omega`` with random unitaries on ``E`` and a random
    co-isometry onto ``E'`` (``extra_inputs`` enlarges ``E'``).

    Returns ``(quadruple, psi0, phi0)`` where ``psi0: E -> G`` and
    ``phi0: E' -> D_omega*``.
    """
    base = phi_coeffs(omega).realization
    g = omega.G_embedding.shape[1]
    r = base.input_dim
    psi0 = random_unitary(rng, g)
    phi0 = adjoint(random_isometry(rng, r + extra_inputs, r))
    c = base.output_op.copy()
    c[:g] = adjoint(psi0) @ c[:g]
    sys = LinearSystem(base.state_op, base.input_op @ phi0, c, base.feed_op @ phi0)
    return RedhefferQuadruple(sys, g), psi0, phi0


def strict_max_principle_quadruple(rng, u: int, e: int, y: int, ep: int,
                                   c1_scale: float = 0.6, norm: float = 0.8) -> RedhefferQuadruple:
    """Contractive quadruple with ``Gamma_{psi12}`` bounded below by ``c1_scale``."""
    if e < u:
        raise ValueError("need dim E >= dim U")
    m = random_contraction(rng, u + y, u + ep, norm)
    c1 = c1_scale * random_isometry(rng, e, u)
    z, b = m[:u, :u], m[:u, u:]
    c2, d2 = m[u:, :u], m[u:, u:]
    sys = LinearSystem(z, b, np.vstack([c1, c2]), np.vstack([np.zeros((e, ep)), d2]))
    return RedhefferQuadruple(sys, e)


def norm_one_quadruple(rng, u: int, e: int, y: int, ep: int, norm: float = 0.9) -> RedhefferQuadruple:
    """Contractive quadruple plus one extra state ``u0`` with ``psi12 u0 = 0``
    and ``psi22 u0`` a unit constant.  The extra state is the last coordinate."""
    base = random_contractive_system(rng, u, ep, e + y, norm)
    c = base.output_op.copy()
    c[:e] = c[:e] * 0.5
    d = base.feed_op.copy()
    d[:e] = 0
    z = np.zeros((u + 1, u + 1), dtype=complex)
    z[:u, :u] = base.state_op
    b = np.vstack([base.input_op, np.zeros((1, ep))])
    cc = np.zeros((e + y + 1, u + 1), dtype=complex)
    cc[:e + y, :u] = c
    cc[e + y, u] = 1.0
    dd = np.vstack([d, np.zeros((1, ep))])
    return RedhefferQuadruple(LinearSystem(z, b, cc, dd), e)
