import json
import subprocess
import sys

import numpy as np
import pytest

from moritacp.cli import gen_random, main, run, sweep_one
from moritacp.errors import InstanceError
from moritacp.instance import build_instance, decode_array, dumps, encode_array, load_instance

from conftest import fixture_path


def run_cli(capsys, *argv):
    code = main(list(argv))
    return code, json.loads(capsys.readouterr().out)


def test_array_encoding_roundtrip():
    a = np.array([[1 + 2j, -0.5], [0, 3j]])
    np.testing.assert_array_equal(decode_array(encode_array(a)), a)
    with pytest.raises(InstanceError):
        decode_array([[1, 2, 3]])


def test_shipped_fixtures_load():
    inst = load_instance(fixture_path("example_gns5.json"))
    assert set(inst.cp_maps) == {"identity"} and set(inst.bimodules) == {"columns"}
    assert load_instance(fixture_path("example_pipeline.json")).cp_maps["psi"].certificate.passed


def test_empty_file_is_a_parse_error(tmp_path):
    path = tmp_path / "empty.json"
    path.write_text("")
    with pytest.raises(InstanceError, match=r"empty.json:1:1"):
        load_instance(path)


def test_non_projection_names_the_object():
    data = {"algebras": {"C": [1]}, "modules": {"F": {"algebra": "C", "p": encode_array([[2.0]])}}}
    with pytest.raises(InstanceError, match="modules.F.*projection"):
        build_instance(data)


def test_unknown_reference():
    data = {"algebras": {"C": [1]}, "modules": {"F": {"algebra": "M"}}}
    with pytest.raises(InstanceError, match="unknown algebra 'M'"):
        build_instance(data)


def test_ksgns_report_on_trace_fixture(capsys):
    code, report = run_cli(capsys, "run", "ksgns", fixture_path("example_trace.json"))
    assert code == 0 and report["pass"]
    assert report["certificates"][0]["info"]["dim_F_psi"] == 4
    assert report["tol"] == 1e-9 and report["rank_cutoff"] == 1e-10


def test_verify_sme_on_reflexive_fixture(capsys):
    code, report = run_cli(capsys, "run", "verify-sme", fixture_path("reflexive_witness.json"))
    assert code == 0 and report["pass"]


@pytest.mark.parametrize("command", ["induce", "transfer", "example-gns5"])
def test_pipeline_commands(capsys, command):
    code, report = run_cli(capsys, "run", command, fixture_path("example_pipeline.json"))
    assert code == 0 and report["pass"]


def test_failing_witness_gives_exit_one(tmp_path, capsys):
    data = json.load(open(fixture_path("reflexive_witness.json")))
    w = data["witnesses"]["reflexive"]
    w["piY"] = encode_array(2 * decode_array(w["piY"]))
    path = tmp_path / "scaled.json"
    path.write_text(json.dumps(data))
    code, report = run_cli(capsys, "run", "verify-sme", str(path))
    assert code == 1 and not report["pass"]
    assert "cond1_left_inner" in report["certificates"][0]["failing"]


def test_errors_are_structured(tmp_path, capsys):
    code, report = run_cli(capsys, "run", "ksgns", str(tmp_path / "missing.json"))
    assert code == 2
    assert report["error"]["type"] == "InstanceError"
    with pytest.raises(InstanceError):
        run("bogus", None)
    with pytest.raises(SystemExit):
        main(["run", "bogus"])


def test_cp_witness_and_gns_commands(tmp_path, capsys):
    from moritacp.correspondence import example_gns5
    from moritacp.algebra import Algebra
    from moritacp.bimodule import matrix_column_bimodule
    from moritacp.correspondence import cp_into_algebra
    C = Algebra([1])
    ident = cp_into_algebra(C, C, np.ones((1, 1, 1)))
    _, d = example_gns5(ident, matrix_column_bimodule(C, 2))
    data = {
        "algebras": {"C": [1], "M2": [2]},
        "modules": {"line": {"algebra": "C", "n": 1}, "M2line": {"algebra": "M2", "n": 1}},
        "cp_maps": {
            "psi": {"source": "C", "module": "line", "values": encode_array([[[1]]])},
            "phi": {"source": "M2", "module": "M2line", "values": encode_array(d["phi"].table)},
            "phi_T": {"source": "M2", "module": {"algebra": "C", "n": 2},
                      "values": encode_array(d["phi_T"].table)},
        },
        "bimodules": {"Y": {"kind": "matrix_column", "algebra": "C", "n": 2},
                      "X": {"kind": "matrix_column", "algebra": "C", "n": 2}},
        "cp_witnesses": {"w": {"phi": "phi_T", "psi": "psi", "bimodule": "Y",
                               "piY": encode_array(d["witness"].table)}},
        "correspondences": {"e": {"phi": "phi", "psi": "psi", "X": "X", "Y": "Y",
                                  "map": encode_array(d["map"])},
                            "from_witness": {"phi": "phi", "psi": "psi", "X": "X", "Y": "Y",
                                             "piY": encode_array(d["witness"].table)}},
    }
    path = tmp_path / "inst.json"
    path.write_text(dumps(data))
    code, report = run_cli(capsys, "run", "verify-cp-sme", str(path))
    assert code == 0 and report["pass"]
    code, report = run_cli(capsys, "run", "gns-sme", str(path))
    assert code == 0 and report["pass"]
    assert [c["subject"] for c in report["certificates"]] == ["e", "from_witness"]


def test_out_flag_writes_same_text(tmp_path, capsys):
    out = tmp_path / "report.json"
    main(["run", "ksgns", fixture_path("example_trace.json"), "--out", str(out)])
    assert out.read_text() == capsys.readouterr().out


def test_flags_are_recorded(capsys):
    code, report = run_cli(capsys, "run", "ksgns", fixture_path("example_trace.json"),
                           "--tol", "1e-7", "--rank-cutoff", "1e-11", "--seed", "3")
    assert (report["tol"], report["rank_cutoff"], report["seed"]) == (1e-7, 1e-11, 3)
    main(["run", "ksgns", fixture_path("example_trace.json")])
    capsys.readouterr()


def test_gen_examples():
    a = gen_random("cp-map", 1, source_dims=[2])
    inst = build_instance(a)
    assert inst.cp_maps["psi"].certificate.passed
    assert dumps(a) == dumps(gen_random("cp-map", 1, source_dims=[2]))
    b = build_instance(gen_random("bimodule", 2, dims=[1], n=1))
    assert b.bimodules["Y"].certificate.passed
    full = {"algebras": {"D": [2]}, "bimodules": {"Y": {"kind": "corner", "algebra": "D",
                                                        "p": encode_array(np.eye(2))}}}
    assert build_instance(full).bimodules["Y"].left_alg.block_dims == (2,)
    with pytest.raises(InstanceError, match="cap"):
        gen_random("cp-map", 0, dims=[9, 9])


def test_generated_pipeline_runs(tmp_path, capsys):
    path = tmp_path / "p.json"
    path.write_text(dumps(gen_random("pipeline", 4)))
    code, report = run_cli(capsys, "run", "transfer", str(path))
    assert code == 0 and report["pass"]


def test_sweep_instance_is_seeded():
    a, b = sweep_one(3, 1, 1e-9, 1e-10), sweep_one(3, 1, 1e-9, 1e-10)
    assert a.passed
    assert dumps(a.to_dict()) == dumps(b.to_dict())


def test_console_script_entry_point():
    out = subprocess.run([sys.executable, "-m", "moritacp.cli", "run", "ksgns",
                          fixture_path("example_trace.json")], capture_output=True, text=True)
    assert out.returncode == 0
    assert json.loads(out.stdout)["pass"]
