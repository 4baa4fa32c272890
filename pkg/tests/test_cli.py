import json

import pytest

from textmag.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_build_statistics(capsys, uniform_ab3_path):
    code, out, _ = run(capsys, "build", "--model", str(uniform_ab3_path))
    assert code == 0
    assert "objects,10" in out
    assert "terminating,7" in out
    assert "interior,3" in out


def test_build_dump(capsys, uniform_ab3_path):
    code, out, _ = run(capsys, "build", "--model", str(uniform_ab3_path),
                       "--dump")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "text,length,finished,pi_from_root"
    assert lines[1] == "<bos>,1,false,1"
    assert len(lines) == 11


def test_magnitude_single_point(capsys, uniform_ab3_path):
    code, out, _ = run(capsys, "magnitude", "--model", str(uniform_ab3_path),
                       "--t-min", "1", "--t-max", "1", "--steps", "1")
    assert code == 0
    assert out.splitlines() == ["t,f_entropy,f_mobius,f_dense,f_euler",
                                "1,7,7,7,7"]


def test_magnitude_grid_and_out_file(capsys, tmp_path, uniform_ab3_path):
    out_path = tmp_path / "curve.csv"
    code, out, _ = run(capsys, "magnitude", "--model", str(uniform_ab3_path),
                       "--t-min", "0.5", "--t-max", "2", "--steps", "4",
                       "--out", str(out_path))
    assert code == 0 and out == ""
    lines = out_path.read_text().splitlines()
    assert lines[0] == "t,f_entropy,f_mobius,f_dense,f_euler"
    assert len(lines) == 5
    first = lines[1].split(",")
    assert first[0] == "0.5"
    assert float(first[1]) == pytest.approx(10 - 3 ** 1.5, abs=1e-10)


def test_magnitude_single_method_leaves_other_columns_empty(capsys,
                                                            uniform_ab3_path):
    code, out, _ = run(capsys, "magnitude", "--model", str(uniform_ab3_path),
                       "--t-min", "2", "--t-max", "2", "--steps", "1",
                       "--method", "entropy")
    assert code == 0
    assert out.splitlines()[1] == "2,9,,,"


def test_verify_passes(capsys, uniform_ab3_path):
    code, out, _ = run(capsys, "verify", "--model", str(uniform_ab3_path))
    assert code == 0
    assert "FAIL" not in out
    assert out.strip().endswith("checks_failed,0")


def test_verify_reports_failure(capsys, uniform_ab3_path, monkeypatch):
    import textmag.cli as cli_module
    monkeypatch.setattr(cli_module, "poset_magnitude", lambda cat: 2)
    code, out, _ = run(capsys, "verify", "--model", str(uniform_ab3_path))
    assert code == 1
    assert "FAIL poset_magnitude" in out


def test_verify_rejects_bad_model(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({
        "alphabet": ["a"], "cutoff": 2,
        "model": {"kind": "table", "nodes": {"<bos>": {"a": 0.5, "<eos>": 0.3}}},
    }))
    code, _, err = run(capsys, "verify", "--model", str(bad))
    assert code == 2
    assert "0.8" in err


def test_homology_csv(capsys, uniform_ab3_path):
    code, out, _ = run(capsys, "homology", "--model", str(uniform_ab3_path),
                       "--k-max", "3")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "k,ell,rank_MC,rank_H"
    assert lines[1] == "0,0,10,10"
    assert lines[2] == "1,1.09861228867,9,9"


def test_entropy_table(capsys, uniform_ab3_path):
    code, out, _ = run(capsys, "entropy", "--model", str(uniform_ab3_path))
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "text,shannon,tsallis"
    assert lines[-1].startswith("f_prime_1,")
    assert len(lines) == 5  # header + 3 interior nodes + derivative


def test_perplexity_scalar(capsys, uniform_ab3_path):
    code, out, _ = run(capsys, "perplexity", "--model", str(uniform_ab3_path),
                       "--text", "a b")
    assert code == 0
    assert out.strip() == "3"


def test_diversity_scalar(capsys, uniform_ab3_path):
    code, out, _ = run(capsys, "diversity", "--model", str(uniform_ab3_path),
                       "--t", "1")
    assert code == 0
    assert float(out.strip()) == pytest.approx(1.831020481113516, abs=1e-9)


def test_digraph_det_and_inverse(capsys, tmp_path):
    edges = tmp_path / "edges.txt"
    edges.write_text("u v 0.5\nu u 1\nv v 1\n")
    code, out, _ = run(capsys, "digraph", "--edges", str(edges),
                       "--invert", "u", "v")
    assert code == 0
    assert out.splitlines() == ["det,1", "inverse,-0.5"]


def test_byte_identical_reruns(capsys, uniform_ab3_path):
    outputs = []
    for _ in range(2):
        _, out, _ = run(capsys, "magnitude", "--model", str(uniform_ab3_path),
                        "--t-min", "0.3", "--t-max", "5", "--steps", "7")
        outputs.append(out)
    assert outputs[0] == outputs[1]
    reruns = []
    for _ in range(2):
        _, out, _ = run(capsys, "verify", "--model", str(uniform_ab3_path))
        reruns.append(out)
    assert reruns[0] == reruns[1]
    tables = []
    for _ in range(2):
        _, out, _ = run(capsys, "homology", "--model", str(uniform_ab3_path),
                        "--k-max", "2")
        tables.append(out)
    assert tables[0] == tables[1]


def test_prompt_option(capsys, uniform_ab3_path):
    code, out, _ = run(capsys, "build", "--model", str(uniform_ab3_path),
                       "--prompt", "a")
    assert code == 0
    assert "objects,4" in out
    assert "terminating,3" in out


def test_usage_error_exit_code(capsys, uniform_ab3_path):
    code, _, err = run(capsys, "magnitude", "--model", str(uniform_ab3_path),
                       "--t-min", "2", "--t-max", "1", "--steps", "1")
    assert code == 2
    assert "t-min" in err
