"""Command-line front end.

Subcommands: gen, verify, sweep, inverse, product, equiv, transform and
interpolant.  Exit codes: 0 when every check passes, 1 when a check fails,
2 on input errors.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import sys
import time

import numpy as np

from . import generators as gen
from . import io
from .errors import RedliftError
from .lifting import (LiftingDataSet, UnderlyingContraction, coefficient_unitary,
                      density_diagnostic, interpolant, inverse_construction,
                      omega_B, omega_equivalence, omega_to_data_set, phi_closed_form,
                      phi_coeffs, sample_points, underlying_contraction, validate,
                      verify_interpolant)
from .opcore import BlockOperator, ToleranceConfig, adjoint, classify, opnorm
from .redheffer import (K_V, RedhefferQuadruple, SchurParameter, bounds_check,
                        coefficient_matrix, gamma_HV, isometry_defect,
                        kernel_inclusion_check, max_principle_suite,
                        redheffer_product, rotation, transform_eval)
from .report import VerificationReport
from .systems import (LinearSystem, coisometry_defect, observable_reduction,
                      strong_stability, taylor, truncated_ops, unitary_equivalence)


class _Suite:
    """Runs named checks, turning exceptions into failed checks."""

    def __init__(self, tol: ToleranceConfig):
        self.tol = tol
        self.report = VerificationReport()

    def run(self, name, fn, tolerance=None):
        tolerance = self.tol.check_tol if tolerance is None else tolerance
        t0 = time.perf_counter()
        try:
            out = fn()
        except (RedliftError, np.linalg.LinAlgError, ValueError) as exc:
            self.report.fail(name, f"{type(exc).__name__}: {exc}")
            out = None
        else:
            if isinstance(out, tuple):
                residual, detail = out
            else:
                residual, detail = out, ""
            if residual is not None:
                self.report.add(name, residual, tolerance, detail=detail)
        self.report.timings[name] = time.perf_counter() - t0
        return out


def _flag(ok: bool) -> float:
    return 0.0 if ok else float("inf")


def _random_parameters(rng, psi: RedhefferQuadruple, n: int, K: int):
    out = [SchurParameter.constant(np.zeros((psi.dim_eprime, psi.dim_e)))]
    for i in range(n):
        state = 0 if i % 2 == 0 else 2
        out.append(gen.random_schur_parameter(rng, psi.dim_e, psi.dim_eprime,
                                              rng.uniform(0.2, 0.9), state, K))
    return out


def _unit_vectors(rng, n: int, count: int):
    out = []
    for _ in range(count):
        u = gen.gaussian(rng, (n,))
        out.append(u / np.linalg.norm(u) if n else u)
    return out


def quadruple_checks(s: _Suite, psi: RedhefferQuadruple, K: int, rng, prefix=""):
    tol = s.tol
    params = _random_parameters(rng, psi, 4, K)
    coiso = coisometry_defect(psi.realization) <= tol.check_tol

    def k0_class():
        k0 = coefficient_matrix(psi, K).matrix
        if coiso:
            return opnorm(k0 @ adjoint(k0) - np.eye(k0.shape[0])), "co-isometry at truncation"
        return max(0.0, opnorm(k0) - 1), "contraction at truncation"
    s.run(prefix + "coefficient_matrix:class", k0_class)

    if coefficient_unitary(psi.realization, tol) and K >= 4:
        # geometric decay certificate: defect(K) <= defect(K - 4) * rho^6
        rho = strong_stability(psi.realization.state_op, tol)[1]
        d_lo = isometry_defect(psi, K - 4)
        bound = d_lo * rho ** 6 + 1e-13
        s.run(prefix + "coefficient_matrix:isometry_defect",
              lambda: (isometry_defect(psi, K), f"defect(K-4)={d_lo:.3e}, rho={rho:.4f}"),
              bound)

    def degree0():
        err = 0.0
        for v in params:
            g0 = gamma_HV(psi, v, K, tol).matrix[:psi.dim_y]
            err = max(err, opnorm(g0 - transform_eval(psi, v, 0.0)))
        return err
    s.run(prefix + "gamma_HV:degree0", degree0)

    def gamma_norm():
        return max(max(0.0, gamma_HV(psi, v, K, tol).norm() - 1) for v in params)
    s.run(prefix + "gamma_HV:contraction", gamma_norm)

    def kv_cross():
        return max(opnorm(K_V(psi, v, K, tol).matrix
                          - redheffer_product(rotation(v, K, tol), coefficient_matrix(psi, K), tol).matrix)
                   for v in params)
    s.run(prefix + "K_V:cross_check", kv_cross)

    def kv_class():
        worst = 0.0
        for v in params:
            kv = K_V(psi, v, K, tol).matrix
            if coiso:
                worst = max(worst, opnorm(kv @ adjoint(kv) - np.eye(kv.shape[0])))
            else:
                worst = max(worst, max(0.0, opnorm(kv) - 1))
        return worst, "co-isometry" if coiso else "contraction"
    s.run(prefix + "K_V:class", kv_class)

    def bounds():
        worst = 0.0
        for v in params:
            for u in _unit_vectors(rng, psi.dim_u, 3):
                b = bounds_check(psi, v, u, K, tol)
                worst = max(worst, max(0.0, -min(b.slacks.values())), max(0.0, b.rhs1 - b.rhs2))
        return worst
    s.run(prefix + "bounds:slack", bounds, 1e-10)

    def maxp():
        rep = max_principle_suite(psi, params[1:], K, tol)
        return _flag(rep.dichotomy_holds and rep.monotone_in_K), \
            f"max={max(rep.norms):.6f} min={min(rep.norms):.6f}"
    s.run(prefix + "max_principle:dichotomy", maxp)

    def kernel():
        worst = 0.0
        for v, vt in zip(params[1:], params[2:] + params[:1]):
            rep = kernel_inclusion_check(psi, v, vt, K, tol)
            worst = max(worst, rep.residual, rep.psi12_residual, rep.mechanism_residual)
        return worst
    s.run(prefix + "max_principle:kernel_inclusion", kernel)

    if coiso and psi.dim_e == 0 or coiso and opnorm(
            psi.realization.output_op[:psi.dim_e] @ adjoint(psi.realization.output_op[:psi.dim_e])
            - np.eye(psi.dim_e)) <= tol.check_tol:
        s.run(prefix + "inverse:coefs_relation",
              lambda: inverse_construction(psi, K=K, tol=tol).relation_residual)
    return params


def data_set_checks(s: _Suite, data: LiftingDataSet, K: int, rng):
    tol = s.tol
    s.report.extend(validate(data, tol))
    try:
        omega = underlying_contraction(data, tol)
    except RedliftError as exc:
        s.report.fail("omega:well_defined", f"{type(exc).__name__}: {exc}")
        return s.report
    s.report.add("omega:well_defined", 0.0, tol.check_tol)
    s.run("omega:contraction", lambda: max(0.0, opnorm(omega.omega) - 1))

    def roundtrip():
        back = underlying_contraction(omega_to_data_set(omega, K), tol)
        return max(opnorm(back.omega - omega.omega), opnorm(back.F_embedding - omega.F_embedding))
    s.run("omega:roundtrip", roundtrip, 1e-10)

    w = omega.omega
    omega_iso = opnorm(adjoint(w) @ w - np.eye(omega.dim_F)) <= tol.check_tol if omega.dim_F else True

    def order_vs_isometry():
        eq = opnorm(adjoint(data.Q) @ data.Q - adjoint(data.R) @ data.R) <= tol.check_tol
        return _flag(eq == omega_iso), f"R*R=Q*Q: {eq}, omega isometric: {omega_iso}"
    s.run("omega:order_isometry_agreement", order_vs_isometry)

    try:
        phi = phi_coeffs(omega, tol)
    except RedliftError as exc:
        s.report.fail("phi:realization", f"{type(exc).__name__}: {exc}")
        return s.report

    def closed_form():
        err = 0.0
        for lam in sample_points(5):
            err = max(err, max(opnorm(a - b) for a, b in
                               zip(phi.evaluate(lam), phi_closed_form(omega, lam, tol))))
        return err
    s.run("phi:closed_form", closed_form)
    s.run("phi:feedthrough", lambda: opnorm(phi.realization.feed_op[:phi.dim_e]))
    params = quadruple_checks(s, phi, K, rng)

    for which, vs in (("central", params[:1]), ("random", params[1:])):
        worst, agree = {}, True
        try:
            for v in vs:
                b = interpolant(data, phi, v, K, tol)
                for c in verify_interpolant(b, data, K, tol).checks:
                    worst[c.name] = max(worst.get(c.name, 0.0), c.residual)
                agree &= omega_B(data, b, tol, omega).isometric == omega_iso
        except RedliftError as exc:
            s.report.fail(f"interpolant:{which}", f"{type(exc).__name__}: {exc}")
            continue
        for name, r in worst.items():
            s.report.add(f"{name}:{which}", r, tol.check_tol)
        s.report.add(f"omega_B:isometry_agreement:{which}", _flag(agree), tol.check_tol)

    def density():
        rep = density_diagnostic(phi, min(K, 6), tol)
        return max(rep.constants_residual, rep.shift_residual)
    s.run("density:shift_invariance", density)
    return s.report


def system_checks(s: _Suite, sysm: LinearSystem, K: int, rng):
    tol = s.tol
    cls = classify(sysm.system_matrix, tol)
    s.run("system:contraction", lambda: (max(0.0, opnorm(sysm.system_matrix) - 1), cls))
    coiso = cls in ("co_isometry", "unitary")

    def trunc():
        mf, gw = truncated_ops(sysm, K)
        op = np.hstack([mf.matrix, gw.matrix])
        if coiso:
            return opnorm(op @ adjoint(op) - np.eye(op.shape[0])), "co-isometry"
        return max(0.0, opnorm(op) - 1), "contraction"
    s.run("truncated_ops:class", trunc)
    if coiso:
        def reduction():
            red = observable_reduction(sysm, tol)
            n = sysm.state_dim + 2
            f1, _ = taylor(sysm, n)
            f2, _ = taylor(red, n)
            return max(max(opnorm(a - b) for a, b in zip(f1, f2)), coisometry_defect(red))
        s.run("observable_reduction:preserves", reduction, 1e-10)

        def self_equiv():
            red = observable_reduction(sysm, tol)
            u = gen.random_unitary(rng, red.state_dim)
            conj = LinearSystem(u @ red.state_op @ adjoint(u), u @ red.input_op,
                                red.output_op @ adjoint(u), red.feed_op)
            theta = unitary_equivalence(red, conj, tol)
            if theta is None:
                return float("inf")
            return opnorm(theta - u)
        s.run("unitary_equivalence:planted", self_equiv)
    return s.report


def verify_instance(obj, K: int, tol: ToleranceConfig, seed) -> VerificationReport:
    rng = gen.make_rng(seed)
    s = _Suite(tol)
    if isinstance(obj, LiftingDataSet):
        return data_set_checks(s, obj, K, rng)
    if isinstance(obj, UnderlyingContraction):
        return data_set_checks(s, omega_to_data_set(obj, K), K, rng)
    if isinstance(obj, RedhefferQuadruple):
        s.run("quadruple:contraction", lambda: max(0.0, opnorm(obj.realization.system_matrix) - 1))
        quadruple_checks(s, obj, K, rng)
        return s.report
    if isinstance(obj, LinearSystem):
        return system_checks(s, obj, K, rng)
    if isinstance(obj, SchurParameter):
        s.run("schur:open_ball",
              lambda: max(0.0, opnorm(obj.multiplication(K)) - (1 - tol.norm_slack)))
        s.run("rotation:unitary", lambda: opnorm(
            (lambda r: r @ adjoint(r) - np.eye(r.shape[0]))(rotation(obj, K, tol).matrix)))
        return s.report
    s.run("blocked:contraction", lambda: (max(0.0, opnorm(obj.matrix) - 1),
                                          classify(obj.matrix, tol)))
    return s.report


# ---------------------------------------------------------------- commands

def _dims(text, n, default):
    if text is None:
        return default
    try:
        vals = [int(x) for x in text.split(",")]
    except ValueError as exc:
        raise io.ParseError(f"bad --dims {text!r}") from exc
    if len(vals) != n or min(vals) < 0:
        from .errors import BadDims
        raise BadDims(f"--dims needs {n} nonnegative integers")
    return vals


def cmd_gen(args, tol):
    rng = gen.make_rng(args.seed)
    kind = args.kind
    rho = (0.0, args.rho_max) if args.rho_max is not None else None
    meta = {"seed": args.seed, "prng": "PCG64 + Box-Muller"}

    def make_omega(default=(2, 3, 2)):
        d, a, f = _dims(args.dims, 3, list(default))
        if args.F_zero:
            f = 0
        if args.G_zero:
            f = a
        if f > a:
            from .errors import BadDims
            raise BadDims("dim F cannot exceed dim D_A")
        return gen.random_omega(rng, d, a, f, norm=args.norm, isometric=args.isometric,
                                rho_range=rho)

    if kind == "omega":
        obj = make_omega()
    elif kind == "data_set":
        if args.from_omega:
            om = io.load(args.from_omega)
            if not isinstance(om, UnderlyingContraction):
                raise io.ParseError("--from-omega needs an omega file")
            obj = omega_to_data_set(om, args.K)
        elif args.A_norm is not None:
            hp, k, h0 = _dims(args.dims, 3, [2, 3, 2])
            obj = gen.random_data_set(rng, hp, k, h0, a_norm=args.A_norm,
                                      isometric=args.isometric, K=args.K)
        else:
            obj = omega_to_data_set(make_omega(), args.K)
        if args.dress:
            obj = gen.dress_data_set(rng, obj)
    elif kind == "quadruple":
        om = make_omega()
        obj = gen.dressed_normal_form(rng, om, args.extra_inputs)[0] if args.dress \
            else phi_coeffs(om, tol)
        if args.dress:
            meta["extra_inputs"] = args.extra_inputs
    elif kind == "system":
        n, m, p = _dims(args.dims, 3, [3, 2, 2])
        obj = gen.random_coisometric_system(rng, n, m, p)
    elif kind == "schur_param":
        e_in, e_out, state = _dims(args.dims, 3, [1, 1, 0])
        norm = 0.5 if args.norm is None else args.norm
        obj = gen.random_schur_parameter(rng, e_in, e_out, norm, state, args.K)
    else:
        raise io.ParseError(f"unknown kind {kind!r}")
    io.write_text(args.out, io.dumps(io.encode(obj, meta)))
    return 0


def _emit_report(args, rep: VerificationReport, extra=None):
    doc = rep.to_dict(timings=args.timings)
    if extra:
        doc.update(extra)
    io.write_text(args.out, io.dumps(doc))
    return 0 if rep.passed else 1


def cmd_verify(args, tol):
    obj = io.load(args.instance)
    return _emit_report(args, verify_instance(obj, args.K, tol, args.seed))


def _sweep_rows(psi: RedhefferQuadruple, v0: SchurParameter, K: int, t_max: float,
                points: int, tol: ToleranceConfig):
    _, g12, _, g22 = psi.truncated(K)
    col = np.vstack([g12, g22])
    iso = psi.dim_u == 0 or opnorm(adjoint(col) @ col - np.eye(psi.dim_u)) <= tol.check_tol
    smin = 0.0
    if psi.dim_u and g12.shape[0] >= psi.dim_u:
        smin = float(np.linalg.svd(g12, compute_uv=False).min())
    n22 = opnorm(g22)
    rows = []
    for t in np.linspace(0.0, t_max, points):
        sys_ = v0.system
        vt = SchurParameter(LinearSystem(sys_.state_op, t * sys_.input_op, sys_.output_op,
                                         t * sys_.feed_op), True, K)
        m = opnorm(vt.multiplication(K))
        norm = gamma_HV(psi, vt, K, tol).norm()
        c = (1 - m) / (1 + m)
        b2 = np.sqrt(max(0.0, 1 - c * smin ** 2))
        b3 = np.sqrt(2 * m / (1 + m) + c * n22 ** 2) if iso else float("nan")
        rows.append((float(t), norm, float(b2), float(b3)))
    return rows


def cmd_sweep(args, tol):
    psi = io.load(args.quadruple)
    if not isinstance(psi, RedhefferQuadruple):
        raise io.ParseError("sweep needs a quadruple file")
    if args.param:
        v0 = io.load(args.param)
    else:
        v0 = gen.random_schur_parameter(gen.make_rng(args.seed), psi.dim_e, psi.dim_eprime,
                                        1.0, 0, args.K)
    if not 0 <= args.t_max < 1:
        raise io.ParseError("--t-max must lie in [0, 1)")
    rows = _sweep_rows(psi, v0, args.K, args.t_max, args.points, tol)
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "norm", "bound2", "bound3"])
    for r in rows:
        w.writerow([repr(x) for x in r])
    io.write_text(args.out, buf.getvalue())
    return 0


def cmd_inverse(args, tol):
    obj = io.load(args.instance)
    if isinstance(obj, LinearSystem):
        if args.split is None:
            raise io.ParseError("--split is required for a system file")
        obj = RedhefferQuadruple(obj, args.split)
    if not isinstance(obj, RedhefferQuadruple):
        raise io.ParseError("inverse needs a quadruple or system file")
    res = inverse_construction(obj, K=args.K, tol=tol)
    rep = VerificationReport()
    rep.add("inverse:coefs_relation", res.relation_residual, tol.check_tol)
    rep.add("inverse:psi_unitary", _flag(res.psi.shape[0] == res.psi.shape[1]
                                         and classify(res.psi, tol) in ("unitary",)), tol.check_tol)
    if res.coefficient_unitary:
        rep.add("inverse:phi_unitary", _flag(res.phi_unitary), tol.check_tol)
    extra = {"data_set": io.encode(res.data_set), "psi": io.encode_matrix(res.psi),
             "phi": io.encode_matrix(res.phi)}
    return _emit_report(args, rep, extra)


def cmd_product(args, tol):
    m1, m2 = io.load(args.first), io.load(args.second)
    if not (isinstance(m1, BlockOperator) and isinstance(m2, BlockOperator)):
        raise io.ParseError("product needs two blocked files")
    io.write_text(args.out, io.dumps(io.encode(redheffer_product(m1, m2, tol))))
    return 0


def cmd_equiv(args, tol):
    a, b = io.load(args.first), io.load(args.second)
    if isinstance(a, UnderlyingContraction) and isinstance(b, UnderlyingContraction):
        res = omega_equivalence(a, b, tol)
        doc = {"theta": None if res is None else io.encode_matrix(res.theta)}
        if res is not None:
            doc.update({"reduces_F": res.reduces_F, "omega1_residual": res.omega1_residual,
                        "readings": res.readings(tol),
                        "reading_residuals": {"right": res.reading_right, "left": res.reading_left}})
        found = res is not None
    elif isinstance(a, LinearSystem) and isinstance(b, LinearSystem):
        theta = unitary_equivalence(a, b, tol)
        doc = {"theta": None if theta is None else io.encode_matrix(theta)}
        found = theta is not None
    else:
        raise io.ParseError("equiv needs two omega files or two system files")
    io.write_text(args.out, io.dumps(doc))
    return 0 if found else 1


def _parse_complex(text: str) -> complex:
    try:
        parts = [float(x) for x in text.split(",")]
    except ValueError as exc:
        raise io.ParseError(f"bad complex number {text!r}") from exc
    if len(parts) == 1:
        parts.append(0.0)
    if len(parts) != 2:
        raise io.ParseError(f"bad complex number {text!r}")
    return complex(parts[0], parts[1])


def cmd_transform(args, tol):
    psi, v = io.load(args.quadruple), io.load(args.param)
    if not (isinstance(psi, RedhefferQuadruple) and isinstance(v, SchurParameter)):
        raise io.ParseError("transform needs a quadruple and a schur_param file")
    val = transform_eval(psi, v, _parse_complex(args.lam))
    io.write_text(args.out, io.dumps({"value": io.encode_matrix(val)}))
    return 0


def cmd_interpolant(args, tol):
    data = io.load(args.data_set)
    if isinstance(data, UnderlyingContraction):
        data = omega_to_data_set(data, args.K)
    if not isinstance(data, LiftingDataSet):
        raise io.ParseError("interpolant needs a data_set file")
    phi = phi_coeffs(underlying_contraction(data, tol), tol)
    v = io.load(args.param) if args.param else None
    b = interpolant(data, phi, v, args.K, tol)
    rep = verify_interpolant(b, data, args.K, tol)
    return _emit_report(args, rep, {"B": io.encode_matrix(b.matrix)})


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--K", type=int, default=16, help="truncation degree (default 16)")
    common.add_argument("--seed", type=int, default=0, help="PCG64 seed")
    common.add_argument("--tol-check", type=float, default=1e-9)
    common.add_argument("--tol-rank", type=float, default=1e-10)
    common.add_argument("--norm-slack", type=float, default=1e-6)
    common.add_argument("--out", default="-", help="output path, '-' for stdout")
    common.add_argument("--timings", action="store_true", help="include timings in reports")

    p = argparse.ArgumentParser(prog="redlift", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="generate a random instance")
    g.add_argument("kind", choices=["omega", "data_set", "quadruple", "system", "schur_param"])
    g.add_argument("--dims", help="comma separated dimensions")
    g.add_argument("--isometric", action="store_true")
    g.add_argument("--rho-max", type=float)
    g.add_argument("--A-norm", dest="A_norm", type=float)
    g.add_argument("--F-zero", dest="F_zero", action="store_true")
    g.add_argument("--G-zero", dest="G_zero", action="store_true")
    g.add_argument("--norm", type=float)
    g.add_argument("--from-omega")
    g.add_argument("--dress", action="store_true")
    g.add_argument("--extra-inputs", type=int, default=0)
    g.set_defaults(func=cmd_gen)

    v = sub.add_parser("verify", parents=[common], help="run the applicable check suite")
    v.add_argument("instance")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("sweep", parents=[common], help="norm profile along t * V0")
    s.add_argument("quadruple")
    s.add_argument("--param", help="schur_param file for V0 (random if omitted)")
    s.add_argument("--t-max", type=float, default=0.9)
    s.add_argument("--points", type=int, default=10)
    s.set_defaults(func=cmd_sweep)

    i = sub.add_parser("inverse", parents=[common], help="data set from a co-isometric realization")
    i.add_argument("instance")
    i.add_argument("--split", type=int)
    i.set_defaults(func=cmd_inverse)

    pr = sub.add_parser("product", parents=[common], help="feedback product of two blocked operators")
    pr.add_argument("first")
    pr.add_argument("second")
    pr.set_defaults(func=cmd_product)

    e = sub.add_parser("equiv", parents=[common], help="unitary equivalence of two omegas or systems")
    e.add_argument("first")
    e.add_argument("second")
    e.set_defaults(func=cmd_equiv)

    t = sub.add_parser("transform", parents=[common], help="evaluate H_V at a point")
    t.add_argument("quadruple")
    t.add_argument("param")
    t.add_argument("--lam", default="0", help="re[,im]")
    t.set_defaults(func=cmd_transform)

    it = sub.add_parser("interpolant", parents=[common], help="build and verify B_V")
    it.add_argument("data_set")
    it.add_argument("--param")
    it.set_defaults(func=cmd_interpolant)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        tol = ToleranceConfig(args.tol_rank, args.tol_check, args.norm_slack)
        return args.func(args, tol)
    except RedliftError as exc:
        msg = f"error: {type(exc).__name__}: {exc}"
        if exc.residual is not None:
            msg += f" (residual {exc.residual:.3e})"
        print(msg, file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
