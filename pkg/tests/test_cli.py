import json

import pytest

from _corpus import DATA
from eonvne.cli import main

TOPO = str(DATA.joinpath("diamond_topology.json"))
VN = str(DATA.joinpath("diamond_vn.json"))
NOBEL = str(DATA.joinpath("nobel_germany.json"))


def test_solve_diamond(tmp_path, capsys):
    out = tmp_path / "emb.json"
    assert main(["solve", "--topology", TOPO, "--vn", VN, "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["accepted"] and len(doc["vlinks"][0]["splits"]) == 3
    assert capsys.readouterr().out == ""


def test_solve_rejection_exit_1(tmp_path):
    vn = tmp_path / "vn.json"
    doc = json.loads(open(VN).read())
    doc["vlinks"][0]["demand_gbps"] = 99000
    vn.write_text(json.dumps(doc))
    assert main(["solve", "--topology", TOPO, "--vn", str(vn), "--out", str(tmp_path / "o.json")]) == 1


def test_validate_good_and_corrupted(tmp_path, capsys):
    emb = tmp_path / "emb.json"
    main(["solve", "--topology", TOPO, "--vn", VN, "--out", str(emb)])
    assert main(["validate", "--topology", TOPO, "--vn", VN, "--embedding", str(emb)]) == 0
    doc = json.loads(emb.read_text())
    doc["vlinks"][0]["splits"][1]["s_b"] = doc["vlinks"][0]["splits"][1]["s_t"]
    emb.write_text(json.dumps(doc))
    capsys.readouterr()
    assert main(["validate", "--topology", TOPO, "--vn", VN, "--embedding", str(emb)]) == 1
    assert "slice-count: FAIL" in capsys.readouterr().err


def test_order_brute_force(tmp_path):
    out = tmp_path / "order.json"
    vn = str(DATA.joinpath("order_vn.json"))
    assert main(["order", "--topology", NOBEL, "--vn", vn, "--brute-force", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert len(doc["order"]) == 5 and doc["commonality_index"] == doc["brute_force_index"] and doc["match"]


def test_exact_statuses(tmp_path):
    out = str(tmp_path / "x.json")
    assert main(["exact", "--topology", TOPO, "--vn", VN, "--out", out]) == 0
    assert json.loads(open(out).read())["accepted"]
    assert main(["exact", "--topology", TOPO, "--vn", VN, "--budget-nodes", "3", "--out", out]) == 3
    assert json.loads(open(out).read())["status"] == "budget_exceeded"
    assert main(["exact", "--topology", TOPO, "--vn", VN, "--q", "1", "--out", out]) == 1


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["solve"],
        ["solve", "--topology", TOPO, "--vn", VN, "--k", "0"],
        ["solve", "--topology", "/nonexistent.json", "--vn", VN],
        ["frobnicate"],
        ["solve", "--topology", TOPO, "--vn", VN, "--variant", "Other"],
    ],
)
def test_usage_errors_exit_2(argv, capsys):
    assert main(argv) == 2
    assert capsys.readouterr().out == ""


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"q": 2}))
    out = tmp_path / "o.json"
    assert main(["solve", "--topology", TOPO, "--vn", VN, "--config", str(cfg), "--out", str(out)]) == 0
    assert len(json.loads(out.read_text())["vlinks"][0]["splits"]) == 2
    assert main(["solve", "--topology", TOPO, "--vn", VN, "--config", str(cfg), "--q", "8", "--out", str(out)]) == 0
    assert len(json.loads(out.read_text())["vlinks"][0]["splits"]) == 3


def test_random_vn_from_seed(tmp_path):
    out = tmp_path / "o.json"
    assert main(["solve", "--topology", NOBEL, "--seed", "4", "--out", str(out)]) in (0, 1)
    assert json.loads(out.read_text())["vn"] == "vn4"


def test_convert_topology(tmp_path):
    out = tmp_path / "t.json"
    src = str(DATA.joinpath("nobel_germany.txt"))
    assert main(["convert-topology", "--sndlib", src, "--slice-count", "48", "--name", "nobel-germany", "--out", str(out)]) == 0
    assert json.loads(out.read_text()) == json.loads(open(NOBEL).read())


def test_sweep_writes_csv(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["sweep", "--scenario", str(DATA.joinpath("scenario_diamond.json")), "--out", str(out)]) == 0
    assert out.read_text().startswith("instance,variant,bsr,solver")
