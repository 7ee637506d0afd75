import math

import numpy as np
import pytest

from oscfid.cli import main
from oscfid.curvefile import CurveFile, format_grid, parse_grid


def _run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_grid_parsing():
    assert parse_grid("0:6.283:512") == (0.0, 6.283, 512)
    assert parse_grid(format_grid(-8.0, 8.0, 3)) == (-8.0, 8.0, 3)
    for bad in ("0:1", "0:1:0", "a:b:c", "0:inf:3"):
        with pytest.raises(ValueError):
            parse_grid(bad)


def test_qcurve_recurrences_and_minimum(capsys):
    code, out, _ = _run(capsys, "qcurve", "--eps", "+1", "--g", "1", "--mode", "1,0,-1,1", "--t", "0:6.283:512")
    assert code == 0
    cf = CurveFile.loads(out)
    assert cf.header["case"] == "stable-quantum" and cf.header["mode"] == "1.0,0.0,-1.0,1.0"
    t, v = cf.column("t"), cf.column("value")
    assert len(t) == 512 and np.all(np.diff(t) > 0)
    assert v.min() == pytest.approx(1 / 3, abs=1e-4)
    assert v[0] == pytest.approx(1.0)
    assert v[np.argmin(abs(t - math.pi))] > 0.999


def test_qcurve_unstable_symmetric(capsys):
    code, out, _ = _run(capsys, "qcurve", "--eps", "-1", "--g", "1", "--mode", "1,0,0,1")
    v = CurveFile.loads(out).column("value")
    assert code == 0 and len(v) == 512
    assert np.allclose(v, v[::-1], atol=1e-12)


def test_qcurve_g0_constant(capsys):
    code, out, _ = _run(capsys, "qcurve", "--eps", "+1", "--g", "0")
    assert code == 0 and np.allclose(CurveFile.loads(out).column("value"), 1.0)


def test_qcurve_bad_mode_is_usage_error(capsys):
    code, _, err = _run(capsys, "qcurve", "--eps", "1", "--g", "1", "--mode", "1,1,1,1")
    assert code == 2 and "Wronskian" in err
    assert _run(capsys, "qcurve", "--eps", "1", "--g", "1", "--mode", "1,2")[0] == 2
    assert _run(capsys, "qcurve", "--eps", "2", "--g", "1")[0] == 2


def test_ccurve_stable_gaussian(capsys):
    code, out, _ = _run(capsys, "ccurve", "--eps", "+1", "--g", "1", "--dist", "gaussian", "--t", "0:3.1416:128")
    cf = CurveFile.loads(out)
    t, v = cf.column("t"), cf.column("value")
    assert code == 0
    assert v[0] == pytest.approx(1.0, abs=1e-8)
    assert abs(t[np.argmin(v)] - math.pi / 2) < 0.03
    assert v.min() >= math.exp(-2) - 1e-8
    # steep drop right after t = 0
    assert v[1] < 0.8


def test_ccurve_rescaled_ball_plateau(capsys):
    code, out, _ = _run(capsys, "ccurve", "--eps", "-1", "--rescaled", "--dist", "ball",
                        "--t", "5:8:4", "--samples", "200000")
    v = CurveFile.loads(out).column("value")
    assert code == 0 and np.all(abs(v - 0.497) < 0.01)


def test_ccurve_small_coupling_ball(capsys):
    code, out, _ = _run(capsys, "ccurve", "--eps", "+1", "--g", "0.2", "--dist", "ball",
                        "--t", "0:3.1416:12", "--samples", "100000")
    cf = CurveFile.loads(out)
    assert code == 0
    assert np.all(cf.column("value") >= 1 - 0.4 * math.sqrt(2) - 3 * cf.column("error"))


def test_ccurve_usage_errors(capsys):
    assert _run(capsys, "ccurve", "--eps", "1")[0] == 2
    assert _run(capsys, "ccurve", "--eps", "1", "--g", "1", "--rescaled")[0] == 2
    assert _run(capsys, "ccurve", "--eps", "1", "--g", "1", "--dist", "ball", "--method", "quadrature")[0] == 2


def test_round_trip_quadrature_and_monte_carlo(tmp_path, capsys):
    for argv in (["ccurve", "--eps", "1", "--g", "0.5", "--t", "0:1:4"],
                 ["ccurve", "--eps", "-1", "--g", "0.5", "--dist", "ball", "--t", "-1:1:3",
                  "--samples", "20000", "--seed", "9"],
                 ["qcurve", "--eps", "-1", "--g", "0.4", "--mode", "1,0,-1,1", "--t", "-2:2:5"]):
        first = tmp_path / "a.csv"
        assert main(argv + ["-o", str(first)]) == 0
        cf = CurveFile.load(first)
        second = tmp_path / "b.csv"
        assert main(cf.argv() + ["-o", str(second)]) == 0
        assert first.read_text() == second.read_text()


def test_overlay_and_plot(tmp_path, capsys):
    out = tmp_path / "overlay.csv"
    code = main(["ccurve", "--eps", "-1", "--g", "1", "--t", "-3:3:7", "--with-quantum",
                 "-o", str(out), "--plot"])
    assert code == 0
    cf = CurveFile.load(out)
    assert cf.columns == ["t", "value", "error", "quantum"]
    svg = out.with_suffix(".svg").read_text()
    assert svg.lstrip().startswith("<?xml") and "<svg" in svg


def test_plot_without_output_path_is_usage_error(capsys):
    assert _run(capsys, "qcurve", "--eps", "1", "--g", "1", "--plot")[0] == 2


def test_coeffs(capsys):
    code, out, _ = _run(capsys, "coeffs", "--g", "1")
    rows = [l.split(",") for l in out.splitlines() if not l.startswith("#")][1:]
    assert code == 0 and "# exact: yes" in out
    assert sorted(float(r[1]) for r in rows) == pytest.approx([1 / 3, 2 / 3])
    assert float(rows[-1][2]) == pytest.approx(1.0)

    _, out, _ = _run(capsys, "coeffs", "--g", "0")
    rows = [l for l in out.splitlines() if not l.startswith("#")][1:]
    assert rows == ["1,1.0,1.0,1"]

    code, out, err = _run(capsys, "coeffs", "--g", "1.3", "--nmax", "200")
    last = out.splitlines()[-1].split(",")
    assert code == 0 and err == ""
    assert float(last[2]) == pytest.approx(1.0, abs=1e-8)


def test_coeffs_truncation_warning(capsys):
    code, out, err = _run(capsys, "coeffs", "--g", "0.3", "--nmax", "20")
    assert code == 0 and "warning" in err and "tail" in err
    assert len([l for l in out.splitlines() if not l.startswith("#")]) == 21


def test_verify_single_and_deterministic(capsys):
    code, out, _ = _run(capsys, "verify", "--only", "lemma3.2.recurrence")
    assert code == 0
    assert [l.split(",")[0] for l in out.splitlines() if not l.startswith("#")][1:] == ["lemma3.2.recurrence"]
    a = _run(capsys, "verify", "--seed", "42", "--only", "lemma3.2.period,eq3.6.identity")[1]
    b = _run(capsys, "verify", "--seed", "42", "--only", "lemma3.2.period,eq3.6.identity")[1]
    assert a == b


def test_verify_unknown_id(capsys):
    code, _, err = _run(capsys, "verify", "--only", "nope")
    assert code == 2 and "unknown check" in err


def test_verify_list(capsys):
    code, out, _ = _run(capsys, "verify", "--list")
    assert code == 0 and "prop6.3.ball" in out.split()


def test_verify_full_run(capsys):
    code, out, err = _run(capsys, "verify", "--json")
    assert code == 0, err
    assert '"status": "fail"' not in out


def test_verify_strict_fails_inconclusive(capsys, monkeypatch):
    from oscfid import verify
    monkeypatch.setitem(verify.REGISTRY, "fake.noisy",
                        lambda cfg: verify._judge("fake.noisy", -1.0, 0.0, uncertainty=2.0, scale=1.0))
    assert _run(capsys, "verify", "--only", "fake.noisy")[0] == 0
    code, _, err = _run(capsys, "verify", "--only", "fake.noisy", "--strict")
    assert code == 1 and "inconclusive" in err
