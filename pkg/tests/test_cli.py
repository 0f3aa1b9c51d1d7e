"""End-to-end CLI checks: output formats, determinism and exit codes."""

import json
import math

import pytest

from qdual.cli import main
from qdual.scenario import (
    behavior_to_json,
    expression_to_json,
    chsh_expression,
    tsirelson_point,
)
from qdual.family import tsirelson_expression


@pytest.fixture
def chsh_file(tmp_path):
    path = tmp_path / "chsh.json"
    path.write_text(json.dumps(expression_to_json(chsh_expression())))
    return str(path)


@pytest.fixture
def bt_file(tmp_path):
    path = tmp_path / "bt.json"
    path.write_text(json.dumps(expression_to_json(tsirelson_expression())))
    return str(path)


@pytest.fixture
def pt_file(tmp_path):
    path = tmp_path / "pt.json"
    path.write_text(json.dumps(behavior_to_json(tsirelson_point())))
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def test_octagon_csv(capsys):
    code, out = run(capsys, "octagon", "--format", "csv")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "k,r0,r1"
    assert lines[1] == "0,1/1-1/2*s2,0/1"
    assert len(lines) == 9


def test_octagon_svg(capsys):
    code, out = run(capsys, "octagon", "--format", "svg")
    assert code == 0
    assert 'viewBox="0 0 1000 1000"' in out
    assert "<polygon" in out


def test_verify_w3(capsys):
    code, out = run(capsys, "verify-w3")
    assert code == 0
    assert "identity exact" in out
    assert "rank 4" in out


def test_local_bound_chsh_prints_two(capsys, chsh_file):
    code, out = run(capsys, "local-bound", chsh_file)
    assert code == 0
    assert out.strip() == "2"


def test_pair_exact(capsys, bt_file, pt_file):
    code, out = run(capsys, "pair", bt_file, pt_file)
    assert code == 0
    assert out.strip() == "1"


def test_slice_expr_round_trip(capsys, tmp_path):
    code, out = run(capsys, "slice-expr", "--r0", "1/1-1/2*s2", "--r1", "0/1", "--exact")
    assert code == 0
    obj = json.loads(out)
    assert obj == expression_to_json(tsirelson_expression())


def test_nullifiers_level1(capsys):
    code, out = run(capsys, "nullifiers", "--level", "L1")
    assert code == 0
    assert len(out.strip().splitlines()) == 2


def test_npa_bound_cli(capsys, chsh_file):
    code, out = run(capsys, "npa-bound", chsh_file, "--level", "L1")
    assert code == 0
    assert float(out) == pytest.approx(2 * math.sqrt(2), abs=1e-5)


def test_sos_search_fails_at_low_level(capsys, bt_file):
    code, _ = run(capsys, "sos-search", bt_file, "--level", "L1AB")
    assert code == 1


def test_dual_membership_cli(capsys, bt_file):
    code, out = run(capsys, "dual-membership", bt_file)
    assert code == 0
    assert "inside" in out


def test_face_scan_deterministic(capsys, bt_file):
    code1, out1 = run(capsys, "face-scan", bt_file, "--restarts", "60", "--seed", "0")
    code2, out2 = run(capsys, "face-scan", bt_file, "--restarts", "60", "--seed", "0")
    assert code1 == code2 == 0
    assert out1 == out2
    assert out1.splitlines()[0] == "cluster,value,mA0,mA1,mB0,mB1,K00,K01,K10,K11"


def test_fig_slice_data_layers(capsys):
    code, out = run(capsys, "fig-slice-data", "--samples", "16")
    assert code == 0
    layers = {line.split(",")[0] for line in out.strip().splitlines()[1:]}
    assert layers == {"octagon", "circle_half", "circle_quarter_sqrt2"}


def test_proj3d_requires_valid_axes(capsys):
    code, _ = run(capsys, "proj3d-data", "--axes", "K00,K01", "--samples", "2")
    assert code == 2
    code, out = run(
        capsys, "proj3d-data", "--axes", "K00,K01,K11", "--samples", "4"
    )
    assert code == 0
    assert out.splitlines()[0] == "x,y,z"
    assert len(out.strip().splitlines()) == 5


def test_missing_file_is_bad_input(capsys, tmp_path):
    code, _ = run(capsys, "local-bound", str(tmp_path / "nope.json"))
    assert code == 2


def test_malformed_json_is_bad_input(capsys, tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    code, _ = run(capsys, "local-bound", str(path))
    assert code == 2


def test_unknown_flag_rejected(capsys):
    with pytest.raises(SystemExit) as err:
        main(["octagon", "--bogus"])
    assert err.value.code == 2


def test_qubit_stats_behavior(capsys):
    q = math.pi / 4
    code, out = run(
        capsys,
        "qubit-stats",
        "--theta", str(q), "--a0", str(q), "--a1", str(-q),
        "--b0", "0", "--b1", str(2 * q),
    )
    assert code == 0
    obj = json.loads(out)
    assert obj["kind"] == "float"
