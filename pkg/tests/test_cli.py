import csv
import io
import json

import pytest

from divmoments import cli, identities
from divmoments.errors import ConsistencyError
from divmoments.identities import HBReport


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_delta_csv_and_stderr_manifest(capsys):
    code, out, err = run(capsys, "delta", "--x", "10", "--x2", "12", "--format", "csv")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [int(r["x"]) for r in rows] == [10, 11, 12]
    assert rows[0]["D"] == "27"
    manifest = json.loads(err.strip().splitlines()[-1])
    assert manifest["exit_status"] == 0 and manifest["config"]["command"] == "delta"


def test_out_file_and_manifest(tmp_path, capsys):
    out = tmp_path / "sieve.csv"
    assert cli.main(["sieve", "--lo", "1", "--hi", "30", "--out", str(out)]) == 0
    text = out.read_text()
    assert text.count("\n") >= 30
    manifest = json.loads((tmp_path / "sieve.csv.manifest.json").read_text())
    assert manifest["config"]["hi"] == 30
    assert "wall_time_s" in manifest


def test_rerun_is_byte_identical_and_worker_independent(tmp_path):
    paths = []
    for i, w in enumerate(("1", "8", "1")):
        p = tmp_path / f"m{i}.json"
        assert cli.main(["moments", "--x", "2e5", "--k", "2,3", "--workers", w,
                         "--segment-size", "16384", "--y", "1000", "--out", str(p)]) == 0
        paths.append(p)
    data = [p.read_bytes() for p in paths]
    assert data[0] == data[1] == data[2]


@pytest.mark.parametrize("argv", [
    ["delta", "--x", "-5"],
    ["series", "--k", "12", "--y", "10"],
    ["moments", "--x", "100", "--k", "0"],
    ["delta", "--x", "10", "--workers", "0"],
])
def test_config_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and "invalid configuration" in err


def test_budget_exit_3(capsys):
    code, _, err = run(capsys, "series", "--k", "9", "--y", "10000")
    assert code == 3 and "budget" in err


def test_consistency_exit_4(capsys, monkeypatch):
    def boom(args):
        raise ConsistencyError("cross-check mismatch")
    parser_func = cli.build_parser
    def patched():
        p = parser_func()
        p._subparsers._group_actions[0].choices["delta"].set_defaults(func=boom)
        return p
    monkeypatch.setattr(cli, "build_parser", patched)
    code, _, err = run(capsys, "delta", "--x", "10")
    assert code == 4 and "consistency" in err


def test_check_failure_exit_5(capsys, monkeypatch):
    monkeypatch.setattr(identities, "hb_sweep",
                        lambda *a, **k: HBReport(1, 10.0, 20, 1.0, 7, (7,)))
    code, _, _ = run(capsys, "hb-check", "--k", "1", "--z", "10")
    assert code == 5


def test_all_subcommands_run(capsys):
    cmds = [
        ["voronoi", "--x", "1000", "--x2", "1005", "--N", "3"],
        ["voronoi", "--x", "1000", "--N", "3", "--A", "2", "--over", "primes"],
        ["alpha-min", "--k", "3", "--E", "10", "--E-min", "5", "--csv"],
        ["series", "--k", "3", "--y", "100"],
        ["constants", "--k", "3", "--y", "100"],
        ["moments", "--x", "1000", "--k", "1,2", "--over", "integers"],
        ["spacing", "A"],
        ["spacing", "v", "--N", "100", "--X", "2"],
        ["spacing", "B", "--ranges", "2,2,2", "--R", "2", "--tol", "0.1"],
        ["spacing", "large", "--T", "1e4"],
        ["hb-check", "--k", "2", "--z", "10"],
    ]
    for argv in cmds:
        code, out, err = run(capsys, *argv)
        assert code == 0, (argv, err)
        assert out.strip()


def test_constants_k9_warning(capsys):
    code, out, _ = run(capsys, "constants", "--k", "9", "--y", "20", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert "40848" in json.dumps(doc)
