import csv
import io as _io
import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from redlift import io
from redlift.cli import main
from redlift.errors import ParseError
from redlift.generators import make_rng, random_contraction, random_omega
from redlift.lifting import UnderlyingContraction, omega_to_data_set, phi_coeffs
from redlift.opcore import BlockOperator
from redlift.redheffer import RedhefferQuadruple, SchurParameter
from redlift.systems import LinearSystem


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@given(st.integers(0, 2**32 - 1))
def test_matrix_roundtrip_bit_exact(seed):
    m = random_contraction(make_rng(seed), 3, 2)
    back = io.decode_matrix(json.loads(json.dumps(io.encode_matrix(m))))
    assert np.array_equal(back, m)


def test_instance_roundtrips(rng):
    om = random_omega(rng, 2, 3, 2)
    objs = [om, omega_to_data_set(om), phi_coeffs(om), phi_coeffs(om).realization,
            SchurParameter.constant([[0.25]]), BlockOperator(random_contraction(rng, 3, 3), 1, 2)]
    for obj in objs:
        text = io.dumps(io.encode(obj, {"seed": 1}))
        again = io.decode(json.loads(text))
        assert type(again) is type(obj)
        assert io.dumps(io.encode(again, {"seed": 1})) == text


@pytest.mark.parametrize("doc", [
    {}, {"kind": "nope", "payload": {}}, {"kind": "omega", "payload": {}},
    {"kind": "system", "payload": {"Z": {"rows": 1, "cols": 1, "data": []}}},
])
def test_decode_errors(doc):
    with pytest.raises(ParseError):
        io.decode(doc)


def test_gen_deterministic(capsys):
    _, a, _ = run(capsys, "gen", "omega", "--dims", "1,1,1", "--seed", "7")
    _, b, _ = run(capsys, "gen", "omega", "--dims", "1,1,1", "--seed", "7")
    assert a == b
    om = io.decode(json.loads(a))
    assert isinstance(om, UnderlyingContraction) and om.omega.shape == (2, 1)


def test_gen_from_omega(tmp_path, capsys):
    p = tmp_path / "om.json"
    run(capsys, "gen", "omega", "--seed", "3", "--out", str(p))
    _, out, _ = run(capsys, "gen", "data_set", "--from-omega", str(p), "--K", "8")
    got = json.loads(out)
    want = io.encode(omega_to_data_set(io.load(str(p)), 8))
    assert got["payload"] == want["payload"]


def test_gen_schur_param(capsys):
    _, out, _ = run(capsys, "gen", "schur_param", "--norm", "0.5")
    assert json.loads(out)["payload"]["open_ball"] is True


def test_gen_bad_dims(capsys):
    code, _, err = run(capsys, "gen", "omega", "--dims", "1,2")
    assert code == 2 and "BadDims" in err


def test_verify_generated_data_set(tmp_path, capsys):
    p = tmp_path / "d.json"
    run(capsys, "gen", "data_set", "--seed", "4", "--dress", "--out", str(p))
    code, out, _ = run(capsys, "verify", str(p))
    rep = json.loads(out)
    assert code == 0 and rep["summary"]["pass"]
    assert len(rep["checks"]) >= 12
    assert "timings" not in rep


def test_verify_corrupted_order(tmp_path, capsys):
    p = tmp_path / "d.json"
    run(capsys, "gen", "data_set", "--seed", "4", "--out", str(p))
    doc = json.loads(p.read_text())
    q = doc["payload"]["Q"]
    q["data"] = [[0.0, 0.0]] * len(q["data"])
    p.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "verify", str(p))
    rep = json.loads(out)
    assert code == 1
    failed = {c["name"] for c in rep["checks"] if not c["pass"]}
    assert "intertwining:order" in failed


def test_verify_decay_between_truncations(tmp_path, capsys):
    p = tmp_path / "d.json"
    run(capsys, "gen", "data_set", "--seed", "5", "--isometric", "--rho-max", "0.7", "--out", str(p))
    vals = {}
    for K in (4, 12):
        code, out, _ = run(capsys, "verify", str(p), "--K", str(K))
        assert code == 0
        rep = json.loads(out)
        vals[K] = next(c["residual"] for c in rep["checks"]
                       if c["name"] == "coefficient_matrix:isometry_defect")
    assert vals[12] < vals[4] * 1e-3


def test_verify_stdin(monkeypatch, capsys):
    doc = io.dumps(io.encode(random_omega(make_rng(2), 1, 2, 1)))
    monkeypatch.setattr("sys.stdin", _io.StringIO(doc))
    code, out, _ = run(capsys, "verify", "-")
    assert code == 0


def test_verify_parse_error(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    code, _, err = run(capsys, "verify", str(p))
    assert code == 2 and "ParseError" in err


def _csv(text):
    rows = list(csv.reader(_io.StringIO(text)))
    return rows[0], [[float(x) for x in r] for r in rows[1:]]


def test_sweep_constant_when_psi12_vanishes(tmp_path, capsys):
    p = tmp_path / "q.json"
    run(capsys, "gen", "quadruple", "--dims", "2,3,3", "--seed", "1", "--out", str(p))
    psi = io.load(str(p))
    assert psi.dim_e == 0
    code, out, _ = run(capsys, "sweep", str(p), "--points", "5")
    header, rows = _csv(out)
    assert code == 0 and header == ["t", "norm", "bound2", "bound3"]
    norms = [r[1] for r in rows]
    assert max(norms) - min(norms) <= 1e-12


def test_sweep_scalar_monotone_and_central_row(tmp_path, capsys):
    om = UnderlyingContraction(np.array([[0.5]]), np.array([[0.5], [0.0]]), np.array([[1.0], [0.0]]))
    psi = phi_coeffs(om)
    p = tmp_path / "q.json"
    p.write_text(io.dumps(io.encode(psi)))
    v = tmp_path / "v.json"
    v.write_text(io.dumps(io.encode(SchurParameter.constant(np.ones((psi.dim_eprime, psi.dim_e)) / 2))))
    code, out, _ = run(capsys, "sweep", str(p), "--param", str(v), "--points", "7", "--t-max", "0.95")
    _, rows = _csv(out)
    norms = [r[1] for r in rows]
    assert code == 0 and all(b >= a - 1e-12 for a, b in zip(norms, norms[1:]))
    assert max(norms) <= 1 + 1e-12
    g22 = psi.truncated(16)[3]
    assert abs(rows[0][1] - np.linalg.norm(g22, 2)) <= 1e-12


def test_sweep_deterministic(tmp_path, capsys):
    p = tmp_path / "q.json"
    run(capsys, "gen", "quadruple", "--seed", "2", "--out", str(p))
    a = run(capsys, "sweep", str(p), "--seed", "9")[1]
    b = run(capsys, "sweep", str(p), "--seed", "9")[1]
    assert a == b


def test_inverse_normal_form(tmp_path, capsys):
    p = tmp_path / "q.json"
    run(capsys, "gen", "quadruple", "--seed", "2", "--out", str(p))
    code, out, _ = run(capsys, "inverse", str(p))
    rep = json.loads(out)
    assert code == 0
    psi, phi = io.decode_matrix(rep["psi"]), io.decode_matrix(rep["phi"])
    assert np.allclose(psi, np.eye(psi.shape[0])) and np.allclose(phi, np.eye(phi.shape[0]))


def test_inverse_dressed(tmp_path, capsys):
    p = tmp_path / "q.json"
    run(capsys, "gen", "quadruple", "--seed", "2", "--dress", "--out", str(p))
    code, out, _ = run(capsys, "inverse", str(p))
    rep = json.loads(out)
    assert code == 0
    psi = io.decode_matrix(rep["psi"])
    assert not np.allclose(psi, np.eye(psi.shape[0]))


def test_inverse_not_coisometric(tmp_path, capsys):
    s = LinearSystem(0.5 * np.eye(1), [[0.5]], [[0.5], [0.5]], [[0.0], [0.3]])
    p = tmp_path / "s.json"
    p.write_text(io.dumps(io.encode(RedhefferQuadruple(s, 1))))
    code, _, err = run(capsys, "inverse", str(p))
    assert code == 2 and "NotCoisometric" in err and "residual" in err


def test_product_equiv_transform_interpolant(tmp_path, capsys, rng):
    a = tmp_path / "a.json"
    b = tmp_path / "b.json"
    a.write_text(io.dumps(io.encode(BlockOperator(random_contraction(rng, 3, 3), 1, 1))))
    b.write_text(io.dumps(io.encode(BlockOperator(random_contraction(rng, 3, 3), 1, 1))))
    code, out, _ = run(capsys, "product", str(a), str(b))
    assert code == 0 and json.loads(out)["kind"] == "blocked"

    o = tmp_path / "o.json"
    run(capsys, "gen", "omega", "--seed", "6", "--out", str(o))
    code, out, _ = run(capsys, "equiv", str(o), str(o))
    assert code == 0 and json.loads(out)["theta"] is not None

    q = tmp_path / "q.json"
    v = tmp_path / "v.json"
    run(capsys, "gen", "quadruple", "--dims", "2,3,1", "--seed", "6", "--out", str(q))
    psi = io.load(str(q))
    v.write_text(io.dumps(io.encode(SchurParameter.constant(np.zeros((psi.dim_eprime, psi.dim_e))))))
    code, out, _ = run(capsys, "transform", str(q), str(v), "--lam", "0.2,0.1")
    assert code == 0
    val = io.decode_matrix(json.loads(out)["value"])
    assert np.allclose(val, psi.evaluate(0.2 + 0.1j)[3])

    d = tmp_path / "d.json"
    run(capsys, "gen", "data_set", "--seed", "6", "--out", str(d))
    code, out, _ = run(capsys, "interpolant", str(d), "--K", "6")
    assert code == 0 and json.loads(out)["summary"]["pass"]


def test_timings_flag(tmp_path, capsys):
    p = tmp_path / "o.json"
    run(capsys, "gen", "omega", "--seed", "1", "--out", str(p))
    _, out, _ = run(capsys, "verify", str(p), "--K", "4", "--timings")
    assert "timings" in json.loads(out)
