import numpy as np
import pytest

from levelcross import cli, io
from levelcross.billiards import DomainError, RectBilliard
from levelcross.crossings import CrossingWindow, scan_crossings


def _run(tmp_path, sub, *flags, name="out"):
    out = tmp_path / name
    code = cli.main([sub, "--out", str(out), *flags])
    return code, out


def _summary(path):
    d = {}
    for line in path.read_text().splitlines():
        k, _, v = line.partition("=")
        d[k.strip()] = v.strip()
    return d


def test_crossings_csv_matches_brute_force(tmp_path):
    code, out = _run(tmp_path, "crossings", "--model", "rect", "--eps_max", "10")
    assert code == 0
    t = io.read_table(out / "crossings.csv")
    brute = scan_crossings(CrossingWindow(RectBilliard(), 10.0, 1.0, 2.0))
    got = sorted(zip(t["mu_star"], t["n1"], t["n2"], t["n1p"], t["n2p"]))
    assert len(got) == len(brute)
    for (mu, *_), (ka, kb, mu_b, _e) in zip(got, sorted(brute, key=lambda r: r[2])):
        assert mu == pytest.approx(mu_b, abs=1e-9)
    raw = (out / "crossings.csv").read_bytes()
    assert b"\r" not in raw and raw.startswith(b"n1,n2,n1p,n2p,mu_star,energy,V,v,sign\n")


def test_smooth_at_zero_energy(tmp_path):
    code, out = _run(tmp_path, "smooth", "--eps_max", "0")
    assert code == 0
    t = io.read_table(out / "smooth.csv")
    assert np.all(t["density"] == 0)


def test_gv_cylinder_summary(tmp_path):
    code, out = _run(tmp_path, "gv", "--model", "cylinder", "--eps_max", "1400",
                     "--closed", "true", "--level_cutoff", "window")
    assert code == 0
    s = _summary(out / "summary.txt")
    for key, ref in (("n_c", 105158), ("n_plus", 22266), ("n_minus", 82892)):
        assert abs(int(s[key]) / ref - 1) < 0.005
    assert float(s["ks"]) < 0.015
    for name in ("gv.csv", "gv_components.csv", "gv_hist.csv", "manifest.txt"):
        assert (out / name).exists()


def test_levels_and_osc_grid(tmp_path):
    code, out = _run(tmp_path, "levels", "--eps_max", "30", "--mu", "1.5")
    assert code == 0 and io.read_table(out / "levels.csv")["energy"].max() <= 30
    code, out = _run(tmp_path, "osc-grid", "--model", "cylinder", "--eps_min", "10", "--eps_max", "12",
                     "--m_max", "10", "--n_eps", "4", "--n_mu", "3", name="g")
    assert code == 0
    e, mu, v = io.read_grid(out / "osc_grid.dat")
    assert v.shape == (4, 3)


def test_flux_integrated_and_compare(tmp_path):
    code, out = _run(tmp_path, "flux-integrated", "--model", "cylinder", "--eps_min", "80",
                     "--eps_max", "200", "--m_max", "10", "--m2_max", "100", "--sub", "8")
    assert code == 0
    t = io.read_table(out / "flux_integrated.csv")
    assert t["bin_left"].size == 120
    assert set(t) == {"bin_left", "bin_right", "exact", "smooth", "smooth_osc1", "smooth_osc1_osc2"}
    code, out = _run(tmp_path, "compare", "--eps_max", "300", "--bins", "10", name="c")
    assert code == 0
    assert "chi2" in _summary(out / "summary.txt")


def test_determinism_across_workers(tmp_path):
    _, a = _run(tmp_path, "crossings", "--eps_max", "60", "--workers", "1", name="a")
    _, b = _run(tmp_path, "crossings", "--eps_max", "60", "--workers", "3", name="b")
    assert (a / "crossings.csv").read_bytes() == (b / "crossings.csv").read_bytes()


def test_manifest_round_trip(tmp_path):
    _, a = _run(tmp_path, "compare", "--model", "cylinder", "--eps_max", "120", "--bins", "12", name="a")
    lines = (a / "manifest.txt").read_text().splitlines()
    sums = {ln.split()[3]: ln.split()[2] for ln in lines if ln.startswith("# sha256")}
    cfg = tmp_path / "rerun.cfg"
    cfg.write_text("\n".join(ln for ln in lines if not ln.startswith("out ")) + "\n")
    code = cli.main(["compare", "--config", str(cfg), "--out", str(tmp_path / "b")])
    assert code == 0
    for name, digest in sums.items():
        assert io.sha256_file(tmp_path / "b" / name) == digest


def test_config_errors_exit_2(tmp_path, capsys):
    code, out = _run(tmp_path, "crossings", "--eps_max", "-1")
    assert code == 2 and "eps_max" in capsys.readouterr().err
    assert not out.exists()
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("# comment\nbogus = 3\n")
    assert cli.main(["levels", "--config", str(cfg), "--out", str(tmp_path / "x")]) == 2
    assert "bogus" in capsys.readouterr().err
    assert cli.main(["levels", "--workers", "0", "--out", str(tmp_path / "x")]) == 2
    with pytest.raises(SystemExit) as e:
        cli.main(["nope"])
    assert e.value.code == 2


def test_numeric_error_exit_3(tmp_path, monkeypatch, capsys):
    code, _ = _run(tmp_path, "osc-grid", "--eps_min", "0", "--eps_max", "5", "--n_eps", "2", "--n_mu", "2")
    assert code == 2 and "eps_min" in capsys.readouterr().err

    def bad(*a, **k):
        raise DomainError("injected")
    monkeypatch.setattr(cli, "osc_grid", bad)
    code, out = _run(tmp_path, "osc-grid", "--eps_min", "1", "--eps_max", "5", "--n_eps", "2", "--n_mu", "2",
                     name="y")
    assert code == 3 and not out.exists()


def test_no_partial_files(tmp_path, monkeypatch):
    def boom(*a, **k):
        raise FloatingPointError("injected")
    monkeypatch.setattr(io, "write_comparison", boom)
    code, out = _run(tmp_path, "compare", "--eps_max", "50", "--bins", "5")
    assert code == 3
    assert not out.exists()
    assert list(tmp_path.iterdir()) == []
