import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from fermichain.asymptotics import closed_form
from fermichain.chain_model import classify, xydm_couplings
from fermichain.cli import UsageError, dirac_sea_chain, main, parity_chain, parse_config, parse_zeta, run
from fermichain.correlation import entropy


def read_table(text):
    """Split rendered output into (comment lines, list of row dicts)."""
    lines = text.splitlines()
    comments = [ln for ln in lines if ln.startswith("#")]
    body = [ln for ln in lines if not ln.startswith("#")]
    return comments, list(csv.DictReader(io.StringIO("\n".join(body))))


def run_main(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_zeta():
    assert parse_zeta("0:0.5:0.25") == [0.0, 0.25, 0.5]
    assert parse_zeta("0:0.5:0.05")[-1] == 0.5 and len(parse_zeta("0:0.5:0.05")) == 11
    assert parse_zeta("0.3") == [0.3]
    with pytest.raises(UsageError):
        parse_zeta("0:1:-0.1")
    with pytest.raises(UsageError):
        parse_zeta("a:b:c")


def test_parse_config_flow_example():
    cfg = parse_config(["flow", "--xydm", "0,1,0", "--zeta", "0:0.5:0.05", "--alpha", "2", "--X", "400"])
    assert cfg.command == "flow"
    assert cfg.chain == {"xydm": {"gamma": 0.0, "s": 1.0, "h": 0.0}}
    assert len(cfg.zetas) == 11 and cfg.alphas == [2.0] and cfg.sizes == [400]
    assert cfg.mode == "thermo" and cfg.out is None and cfg.jobs == 1


def test_parse_config_file_and_override(tmp_path):
    f = tmp_path / "run.json"
    f.write_text(json.dumps({"xydm": "1,0,4", "alpha": "1,2", "X": 30}))
    cfg = parse_config(["entropy", "--config", str(f), "--X", "20"])
    assert cfg.alphas == [1.0, 2.0] and cfg.sizes == [20]
    f.write_text(json.dumps({"nonsense": 1}))
    with pytest.raises(UsageError):
        parse_config(["entropy", "--config", str(f), "--xydm", "1,0,4"])


@pytest.mark.parametrize("argv", [
    ["entropy", "--xydm", "1,0,4", "--alpha", "-1"],
    ["entropy", "--xydm", "1,0,4", "--X", "0"],
    ["entropy", "--xydm", "1,0"],
    ["entropy"],
    ["flow", "--xydm", "1,0,4"],
    ["multi", "--xydm", "0,0,0"],
    ["entropy", "--xydm", "1,0,4", "--mode", "finite:x"],
    ["entropy", "--xydm", "1,0,4", "--unknown-flag"],
    ["figures", "--which", "7"],
    ["nope"],
])
def test_usage_errors_exit_2(argv, capsys):
    code, out, err = run_main(argv, capsys)
    assert code == 2 and out == ""


def test_classify_row(capsys):
    code, out, _ = run_main(["classify", "--xydm", "1,0,2"], capsys)
    assert code == 0
    comments, rows = read_table(out)
    assert any("sha256" in c for c in comments)
    assert rows[0]["kind"] == "CriticalParityPreservingVacuum"
    assert int(rows[0]["R"]) == 1 and int(rows[0]["Q"]) == 0


def test_entropy_rows_match_library(capsys, tmp_path):
    code, out, _ = run_main(["entropy", "--xydm", "0.5,0,3", "--alpha", "1,2", "--X", "10,20"], capsys)
    assert code == 0
    _, rows = read_table(out)
    assert len(rows) == 4
    for r in rows:
        ref = entropy(xydm_couplings(0.5, 0, 3), int(r["X_size"]), float(r["alpha"])).S
        assert float(r["S"]) == pytest.approx(ref, abs=1e-10)
    code, _, _ = run_main(["entropy", "--xydm", "0.5,0,3", "--X", "10", "--out", str(tmp_path / "o")], capsys)
    assert code == 0
    files = sorted(p.name for p in (tmp_path / "o").rglob("*"))
    assert any(f.endswith(".csv") for f in files) and len(files) >= 2


def test_asym_critxx(capsys):
    code, out, _ = run_main(["asym", "--xydm", "0,0,0.5", "--alpha", "2", "--X", "100"], capsys)
    assert code == 0
    _, rows = read_table(out)
    r = rows[0]
    assert (r["model"], r["params"], r["X"]) == ("critXX", "h=0.5", "100")
    assert float(r["S_asym"]) == pytest.approx(closed_form("critXX", 100, 2.0, h=0.5), abs=1e-9)


def test_flow_rows(capsys):
    code, out, _ = run_main(["flow", "--xydm", "1,0,4", "--zeta", "0:0.2:0.1", "--X", "40"], capsys)
    assert code == 0
    _, rows = read_table(out)
    assert [float(r["zeta"]) for r in rows] == [0.0, 0.1, 0.2]
    for r in rows:
        assert abs(float(r["difference"])) < 1e-8


def test_flow_single_map(capsys):
    # an unnormalized SO(1,1) matrix: scaled to unit determinant, then applied
    code, out, _ = run_main(["flow", "--xydm", "1,0,4", "--X", "40", "--alpha", "1,2",
                             "--mobius", "1.2,0,0.3,0,0.3,0,1.2,0"], capsys)
    assert code == 0
    comments, rows = read_table(out)
    assert any(c.startswith("# map=1.0327955") for c in comments)
    assert len(rows) == 2
    for r in rows:
        assert abs(float(r["difference"])) < 1e-8
        assert float(r["factor_re"]) == pytest.approx(1.0) and float(r["factor_im"]) == 0.0


def test_flow_map_errors(capsys):
    assert run_main(["flow", "--xydm", "1,0,4", "--mobius", "1,0,0,0"], capsys)[0] == 2
    assert run_main(["flow", "--xydm", "1,0,4", "--mobius", "1,0,2,0,0.5,0,1,0"], capsys)[0] == 2
    code, _, err = run_main(["flow", "--xydm", "1,0,4", "--mobius", "1,0,0.3,0,0,0,1,0"], capsys)
    assert code == 1 and "AdmissibilityError" in err


def test_multi_row(capsys):
    code, out, _ = run_main(["multi", "--xydm", "0,0,0", "--intervals", "1:20,41:60", "--alpha", "2"], capsys)
    assert code == 0
    _, rows = read_table(out)
    r = rows[0]
    assert float(r["difference"]) == pytest.approx(float(r["S_direct"]) - float(r["S_product"]), abs=1e-9)
    assert abs(float(r["difference"])) < 5e-2


def test_theta_entropy_check_direct(capsys, tmp_path):
    dump = tmp_path / "curve.json"
    code, out, _ = run_main(["theta-entropy", "--xydm", "0.5,0,3", "--alpha", "2", "--X", "40",
                             "--check-direct", "--json", str(dump)], capsys)
    assert code == 0
    _, rows = read_table(out)
    assert int(rows[0]["genus"]) == 1
    assert abs(float(rows[0]["difference"])) < 1e-9
    data = json.loads(dump.read_text())
    assert "Pi_im" in data


def test_library_failure_exit_1(capsys):
    code, out, err = run_main(["theta-entropy", "--xydm", "1,0,2"], capsys)
    assert code == 1
    assert "riemann.build_curve" in err and "DegeneracyError" in err


def test_figure5_trajectories_constant(capsys):
    code, out, _ = run_main(["figures", "--which", "5"], capsys)
    assert code == 0
    _, rows = read_table(out)
    series = {}
    for r in rows:
        if r["series"] != "grid":
            series.setdefault(r["series"], []).append(float(r["S"]))
    assert len(series) == 5
    for S in series.values():
        assert max(S) - min(S) < 1e-9


def test_output_deterministic(capsys):
    argv = ["flow", "--xydm", "0,0,0.5", "--zeta", "0:0.2:0.1", "--X", "60", "--alpha", "1,2"]
    outs = [run_main(argv, capsys)[1] for _ in range(2)]
    assert outs[0] == outs[1]
    cfg = parse_config(argv + ["--jobs", "2"])
    buf = io.StringIO()
    assert run(cfg, stdout=buf) == 0
    assert buf.getvalue() == outs[0]


def test_figure_chains():
    rep = classify(parity_chain(3 * np.pi / 4))
    assert rep.R == 2
    np.testing.assert_allclose(np.abs(np.angle(rep.u)), 3 * np.pi / 4, atol=1e-8)
    rep = classify(dirac_sea_chain())
    assert rep.R == 0 and rep.Q == 4
    np.testing.assert_allclose(np.sort(np.abs(np.angle(rep.v))),
                               [np.pi / 2, np.pi / 2, 3 * np.pi / 4, 3 * np.pi / 4], atol=1e-8)


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "fermichain", "classify", "--xydm", "1,0,4"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0 and "gapped" in res.stdout.lower()
