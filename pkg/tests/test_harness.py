import math

import pytest

from rsse2h2t import harness as H
from rsse2h2t.channel import ChannelTarget
from rsse2h2t.cli import main

PR2 = ChannelTarget.preset("pr2")


def test_plan_validation():
    with pytest.raises(ValueError):
        H.SimPlan(PR2, 0.1, detectors=("ml", "2,3"), snr_db=(8,))
    with pytest.raises(ValueError):
        H.SimPlan(PR2, 0.1, detectors=("4,2,2",), snr_db=(8,))
    with pytest.raises(ValueError):
        H.SimPlan(PR2, 0.1, snr_db=(8,), min_errors=50)
    with pytest.raises(ValueError):
        H.SimPlan(PR2, 0.1, snr_db=(8,), block_length=150)
    with pytest.raises(ValueError):
        H.SimPlan(PR2, 0.1, 0.2, snr_db=(8,))
    with pytest.raises(ValueError):
        H.SimPlan(PR2, 0.1, detectors=(), snr_db=(8,))
    plan = H.SimPlan(PR2, 0.1, detectors=("ML", "[4,2]", "3, 3"), snr_db=(8,))
    assert plan.detectors == ("ml", "[4,2]", "[3,3]")
    assert plan.counted_symbols == 4096 - 4


def test_low_snr_floor():
    # At -20 dB the single-bit matched-filter value Q(sqrt(2 snr (1 + eps^2))) is about 0.443;
    # the coin-flip floor 0.5 is reached near -40 dB.
    for snr, want in ((-20.0, 0.4427), (-40.0, 0.4942)):
        plan = H.SimPlan(PR2, 0.2, detectors=("ml", "4,2"), snr_db=(snr,), max_bits=400000, min_errors=10**7)
        for p in H.run_ber(plan):
            assert p.ber == pytest.approx(want, abs=0.005)
            assert p.ber == pytest.approx(0.5, abs=0.06)
            assert p.bits >= 400000 - 2 * plan.counted_symbols
            assert 0 <= p.ber <= 1 and p.ber == p.errors / p.bits


def test_determinism_and_workers():
    plan = H.SimPlan(PR2, 0.3, detectors=("ml", "4,2"), snr_db=(7.0, 8.0), min_errors=200, seed=5)
    a = H.points_to_csv(H.run_ber(plan))
    b = H.points_to_csv(H.run_ber(plan))
    assert a == b
    c = H.points_to_csv(H.run_ber(H.SimPlan(**{**plan.__dict__, "workers": 2})))
    assert a == c
    # a detector's counts do not depend on which other detectors share the run
    alone = H.run_ber(H.SimPlan(PR2, 0.3, detectors=("4,2",), snr_db=(7.0, 8.0), min_errors=200, seed=5))
    assert [p for p in H.run_ber(plan) if p.detector == "[4,2]"] == alone
    other = H.points_to_csv(H.run_ber(H.SimPlan(**{**plan.__dict__, "seed": 6})))
    assert other != a


def test_csv_schema():
    pts = [H.BerPoint("ml", 10.25, 1000000, 12, 7), H.BerPoint("[4,2]", 1 / 3, 3, 1, 0)]
    text = H.points_to_csv(pts)
    lines = text.splitlines()
    assert lines[0] == "detector,snr_db,bits,errors_a,errors_b,ber"
    assert lines[1] == "ml,10.25,1000000,12,7,1.9e-05"
    assert lines[2] == '"[4,2]",0.333333,3,1,0,0.333333'
    assert H.read_csv(text)[0] == pts[0]


def test_config_parsing():
    cfg = H.parse_config_text("target=pr2\nepsilon = 0.1  # ITI\n\nconfigs=ml;4,2;3,3\nsnr=8:0.5:10\nseed=1\n")
    plan = H.plan_from_mapping(cfg)
    assert plan.detectors == ("ml", "[4,2]", "[3,3]")
    assert plan.snr_db == (8.0, 8.5, 9.0, 9.5, 10.0)
    assert plan.target == PR2 and plan.epsilon == 0.1 and plan.seed == 1
    assert H.parse_snr_grid("1, 2.5") == (1.0, 2.5)
    with pytest.raises(ValueError):
        H.parse_config_text("target pr2")
    with pytest.raises(ValueError):
        H.plan_from_mapping({**cfg, "colour": "red"})
    with pytest.raises(ValueError):
        H.plan_from_mapping({"target": "pr2", "snr": "8"})
    with pytest.raises(ValueError):
        H.parse_snr_grid("8:0:10")


def _curve(det, snrs, bers, bits=10**8):
    return [H.BerPoint(det, s, bits, int(round(b * bits)), 0) for s, b in zip(snrs, bers)]


def test_snr_loss_interpolation():
    snrs = [8.0, 9.0, 10.0, 11.0]
    ml = _curve("ml", snrs, [1e-2, 1e-3, 1e-4, 1e-5])
    rs = _curve("[4,2]", snrs, [2e-2, 2e-3, 2e-4, 2e-5])
    flat = _curve("[2,1]", snrs, [0.3, 0.2, 0.1, 0.05])
    loss = H.snr_loss_at(ml + rs + flat, 1e-4)
    assert loss["ml"] == 0.0
    assert loss["[4,2]"] == pytest.approx(math.log10(2))
    assert loss["[2,1]"] is None
    assert H.format_loss(None) == "not reached"
    assert H.snr_at_ber(ml, 10**-3.5) == pytest.approx(9.5)
    with pytest.raises(ValueError):
        H.snr_loss_at(rs, 1e-4)


def test_near_ml_point_pr2():
    plan = H.SimPlan(PR2, 0.1, detectors=("ml", "4,2"), snr_db=(10.5,))
    ml, rs = H.run_ber(plan)
    assert ml.errors >= 500 and rs.errors >= 500
    assert 0.5 <= rs.ber / ml.ber <= 2.0


def test_monotone_and_ordered():
    plan = H.SimPlan(ChannelTarget.preset("epr4"), 0.2, detectors=("ml", "4,3,2", "3,3,3"),
                     snr_db=(5.0, 6.0, 7.0, 8.0), min_errors=300)
    pts = H.run_ber(plan)
    by = {}
    for p in pts:
        by.setdefault(p.detector, []).append(p)
    for curve in by.values():
        inversions = [(a, b) for a, b in zip(curve, curve[1:]) if b.ber > a.ber]
        assert all(a.errors < 300 and b.errors < 300 for a, b in inversions)
    for k, m in enumerate(by["ml"]):
        for det in ("[4,3,2]", "[3,3,3]"):
            o = by[det][k]
            assert m.ber <= o.ber + 3 * math.hypot(m.std_error, o.std_error)


def test_reproduce_spectrum_tables(tmp_path):
    files = H.reproduce("VII", tmp_path)
    report = (tmp_path / "table_VII_events.txt").read_text().splitlines()
    i = report.index("# target=epr4 epsilon=0.1 delta_epsilon=0 dmin=16.1600")
    assert report[i + 1] == "[4,3,3] dmin_early=16.1600"
    assert report[i + 2] == "  [(5 0)^inf 1 0]/16.1600"
    assert len(files) == 2
    H.reproduce("table VIII", tmp_path)
    rows = (tmp_path / "table_VIII.csv").read_text().splitlines()
    assert '"[4,4,1]",0.1,0.1,16.0000,12.0000,0' in rows


def test_reproduce_figure_small(tmp_path):
    files = H.reproduce("14", tmp_path, max_bits=20000, min_errors=100)
    names = sorted(f.name for f in files)
    assert len(names) == 6
    assert "fig_14_eps0.4_de0.05.csv" in names
    pts = H.read_csv(files[0].read_text())
    assert {p.detector for p in pts} == {"ml", "[4,4,2]", "[4,3,3]", "[3,3,3]"}
    with pytest.raises(ValueError):
        H.reproduce("XIII", tmp_path)


def test_cli(tmp_path, capsys):
    assert main(["dmin", "--target", "pr2", "--epsilon", "0.1"]) == 0
    assert "dmin=16.1600" in capsys.readouterr().out
    assert main(["dmin", "--target", "1,1.6,1.1,0.4", "--epsilon", "0.1"]) == 0
    assert capsys.readouterr().out.strip() == "dmin=9.1304"
    assert main(["search-events", "--target", "pr2", "--config", "4,3", "--epsilon", "0.2",
                 "--dmax", "25", "--mode", "early"]) == 0
    assert capsys.readouterr().out.splitlines()[0] == "[5 (2 1)^inf 0]/24.9600"
    assert main(["info", "--config", "3,2", "--target", "pr2"]) == 0
    out = capsys.readouterr().out
    assert "states=6" in out and "{0,3} {1} {2}" in out and "merging_states=" in out
    cfg = tmp_path / "plan.txt"
    cfg.write_text("target=pr2\nepsilon=0.2\nconfigs=ml;4,2\nsnr=-20\nmax_bits=20000\nmin_errors=100\n")
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o"), "--snr", "0,1"]) == 0
    capsys.readouterr()
    pts = H.read_csv((tmp_path / "o" / "ber.csv").read_text())
    assert sorted({p.snr_db for p in pts}) == [0.0, 1.0]
    assert main(["info", "--config", "4,3", "--target", "epr4"]) != 0
    err = capsys.readouterr().err
    assert err.count("\n") == 1 and err.startswith("rsse2h2t: error:")
    assert main(["dmin", "--target", "pr2", "--epsilon", "1.5"]) != 0
    assert main(["reproduce", "--id", "nope", "--out", str(tmp_path)]) != 0
