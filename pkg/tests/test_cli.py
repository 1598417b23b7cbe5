import csv
import json

import numpy as np
import pytest

from ncgeom.cli import build_parser, fmt, main
from ncgeom.metric import constant_metric


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_fmt_round_trips_doubles():
    for x in (0.1, 1 / 3, -2.5e-17, 123456789.123456789):
        assert float(fmt(x)) == x
    assert fmt(-0.0) == "0"
    assert fmt(7) == "7"


def test_solve_circle_constant(tmp_path):
    assert main(["solve-circle", "--N", "7", "--out", str(tmp_path)]) == 0
    files = sorted(p.name for p in tmp_path.glob("connection_*.json"))
    assert len(files) == 3
    rows = read_csv(tmp_path / "residuals.csv")
    assert all(float(v) <= 1e-13 for r in rows for k, v in r.items() if k != "family")


def test_solve_circle_case_c(tmp_path):
    argv = ["solve-circle", "--N", "6", "--l", "2", "--case", "Ic", "--kappa-p", "0.3", "--out", str(tmp_path)]
    assert main(argv) == 0
    (f,) = tmp_path.glob("connection_*.json")
    fam = json.loads(f.read_text())["family"]
    assert fam["kappa_p"] == [0.3, 0.0] and "kappa_pt" in fam


def test_solve_circle_no_solution(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"N": 6, "G_p": [[-1, 0], [-2, 0], [-1, 0], [-3, 0], [-1, 0], [-1, 0]],
                               "G_pt": [[-1, 0]] * 6}))
    assert main(["solve-circle", "--metric", str(bad)]) == 2
    assert "not constant" in capsys.readouterr().err


def test_missing_file_is_exit_one(tmp_path):
    assert main(["solve-circle", "--metric", str(tmp_path / "none.json")]) == 1
    assert main(["verify", "--metric", str(tmp_path / "a"), "--connection", str(tmp_path / "b")]) == 1


def test_malformed_metric_is_exit_one(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"N": 5, "G_p": [[0, 0]] * 5, "G_pt": [[1, 0]] * 5}))
    assert main(["solve-circle", "--metric", str(bad)]) == 1


def test_verify_round_trip(tmp_path):
    main(["solve-circle", "--N", "6", "--l", "1", "--out", str(tmp_path)])
    conn = sorted(tmp_path.glob("connection_*.json"))[0]
    metric = tmp_path / "metric.json"
    from ncgeom.metric import metric_from_x
    from ncgeom.solver import nonconstant_x
    from ncgeom.cyclic import CyclicFunction

    m = metric_from_x(nonconstant_x(6, 1, 0.37), CyclicFunction.constant(6, -1.0))
    metric.write_text(json.dumps(m.to_json()))
    out = tmp_path / "verify.csv"
    assert main(["verify", "--metric", str(metric), "--connection", str(conn), "--out", str(out)]) == 0
    names = [r["equation"] for r in read_csv(out)]
    assert "compat_direct" in names and "cotorsion" in names
    wrong = tmp_path / "wrong.json"
    wrong.write_text(json.dumps(constant_metric(6, -3.0, 2.0).to_json()))
    assert main(["verify", "--metric", str(wrong), "--connection", str(conn)]) == 4


def test_curvature_constant_metric_is_flat(tmp_path):
    out = tmp_path / "c.csv"
    assert main(["curvature", "--N", "9", "--case", "b", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert len(rows) == 9 and all(float(r["R"]) == 0 for r in rows)
    assert {"n", "M_p", "M_pt", "Ricci_p_pt"} <= set(rows[0])


def test_curvature_ellipse_closed_form(tmp_path):
    out = tmp_path / "c.csv"
    argv = ["curvature", "--N", "100", "--a", "2", "--b", "1", "--case", "a", "--closed-form", "--out", str(out)]
    assert main(argv) == 0
    rows = read_csv(out)
    assert max(float(r["closed_form_discrepancy"]) for r in rows) <= 1e-11
    R = np.array([float(r["R"]) for r in rows])
    # the profile follows the ellipse's two-fold symmetry
    assert np.allclose(R, np.roll(R, 50), atol=1e-8)


def test_curvature_from_connection_file(tmp_path):
    main(["solve-circle", "--N", "7", "--out", str(tmp_path)])
    conn = sorted(tmp_path.glob("connection_*.json"))[0]
    out = tmp_path / "c.csv"
    assert main(["curvature", "--N", "7", "--connection", str(conn), "--closed-form", "--out", str(out)]) == 0


def test_curvature_degenerate_metric(tmp_path):
    bad = tmp_path / "m.json"
    bad.write_text(json.dumps({"N": 5, "G_p": [[1, 0]] * 5, "G_pt": [[1, 0]] * 5}))
    assert main(["curvature", "--metric", str(bad)]) == 1


def test_inverse_flat(tmp_path):
    out = tmp_path / "inv.csv"
    assert main(["inverse", "--target", "0", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert len(rows) == 53 and all(float(r["G"]) == -1 for r in rows)


def test_inverse_blow_up_writes_partial(tmp_path):
    out = tmp_path / "inv.csv"
    assert main(["inverse", "--target", "-0.05", "--steps", "200", "--out", str(out)]) == 3
    assert 50 < len(read_csv(out)) < 203


def test_inverse_target_file(tmp_path):
    target = tmp_path / "r.txt"
    target.write_text("\n".join(["0.01", "-0.02", "0.0", "0.015"]))
    out = tmp_path / "inv.csv"
    assert main(["inverse", "--target", str(target), "--steps", "4", "--sign", "+", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert max(float(r["residual"]) for r in rows[1:-2]) < 1e-12


def test_torus_constant_has_52_rows(tmp_path):
    out = tmp_path / "t.csv"
    assert main(["torus", "--out", str(out)]) == 0
    rows = read_csv(out)
    assert len(rows) == 52 and max(float(r["max_abs"]) for r in rows) <= 1e-13


def test_torus_families(tmp_path):
    assert main(["torus", "--family", "product", "--N", "5", "--M", "6", "--l", "1",
                 "--out", str(tmp_path / "p.csv")]) == 0
    assert main(["torus", "--family", "alternating", "--axes", "s,pt", "--out", str(tmp_path / "a.csv")]) == 0
    assert main(["torus", "--family", "minus-two", "--out", str(tmp_path / "m.csv")]) == 0
    assert main(["torus", "--family", "file"]) == 1


def test_limit_table(tmp_path):
    out = tmp_path / "l.csv"
    assert main(["limit", "--out", str(out)]) == 0
    errs = [float(r["max_error"]) for r in read_csv(out)]
    assert errs[0] > errs[1] > errs[2]


def test_ellipse_metric_file(tmp_path):
    out = tmp_path / "e.json"
    assert main(["ellipse-metric", "--a", "2", "--b", "1", "--N", "12", "--out", str(out)]) == 0
    curv = tmp_path / "c.csv"
    assert main(["curvature", "--metric", str(out), "--case", "c", "--out", str(curv)]) == 0


def test_outputs_are_byte_stable(tmp_path):
    for run in ("a", "b"):
        main(["solve-circle", "--N", "8", "--l", "3", "--out", str(tmp_path / run)])
        main(["limit", "--out", str(tmp_path / run / "limit.csv")])
    for f in (tmp_path / "a").iterdir():
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()


def test_argument_validation():
    parser = build_parser()
    with pytest.raises(SystemExit):
        parser.parse_args(["inverse", "--tol", "0"])
    with pytest.raises(SystemExit):
        parser.parse_args(["torus", "--axes", "p,pt"])
    with pytest.raises(SystemExit):
        parser.parse_args(["inverse", "--seeds=1,2"])
    args = parser.parse_args(["inverse", "--seeds=-1,-2,-1", "--sign", "+"])
    assert args.seeds == (-1.0, -2.0, -1.0) and args.sign == 1
