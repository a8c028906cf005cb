import csv
import io
import json

import pytest

from numlab import InputError
from numlab.claims import (ClaimResult, RunConfig, claim_ids, claim_seed, render_report,
                           run_reproduce)
from numlab.cli import EXIT_INPUT, EXIT_UNSUPPORTED, load_operator, main

FAST = "extreme-pairs,crich-criterion"


def _op_file(tmp_path, obj, name="op.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def _run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_radius_exact(tmp_path, capsys):
    op = _op_file(tmp_path, {"space": "linf(2)", "matrix": [[0, 1], [1, 0]]})
    code, out, _ = _run(capsys, ["radius", "--op", op])
    res = json.loads(out)
    assert code == 0 and res["value"] == 1.0 and res["method"] == "ExactEnumeration"
    assert res["meets_tol"] and not res["lower_only"]
    assert len(res["witness"]["x"]) == 2


def test_radius_complex_entries(tmp_path, capsys):
    op = _op_file(tmp_path, {"space": "hilbert(2, complex)", "field": "complex",
                             "matrix": [[0, [1, 0]], ["0+0j", 0]]})
    code, out, _ = _run(capsys, ["radius", "--op", op, "--method", "hilbert"])
    assert code == 0 and abs(json.loads(out)["value"] - 0.5) <= 1e-9


def test_radius_space_override(tmp_path, capsys):
    op = _op_file(tmp_path, {"matrix": [[0, -1], [1, 0]]})
    code, out, _ = _run(capsys, ["radius", "--op", op, "--space", "hilbert(2, real)"])
    assert code == 0 and json.loads(out)["value"] == 0.0


def test_radius_sampling_is_lower_only(tmp_path, capsys):
    op = _op_file(tmp_path, {"space": "hexquot", "matrix": [[1, 0], [0, 1]]})
    code, out, _ = _run(capsys, ["radius", "--op", op, "--method", "sample"])
    res = json.loads(out)
    assert code == 0 and res["lower_only"] and not res["meets_tol"]


@pytest.mark.parametrize("obj", [
    {"matrix": [[1, 0], [0, 1]]},
    {"space": "linf(2)", "matrix": [[1, 0, 0], [0, 1, 0]]},
    {"space": "linf(2)", "matrix": [[[1, 2, 3], 0], [0, 1]]},
    {"space": "linf(2)", "field": "complex", "matrix": [[1, 0], [0, 1]]},
    {"space": "linf(2)", "matrix": [[[0, 1], 0], [0, 1]]},
    {"space": "nonsense(2)", "matrix": [[1]]},
])
def test_radius_bad_input(tmp_path, capsys, obj):
    code, _, err = _run(capsys, ["radius", "--op", _op_file(tmp_path, obj)])
    assert code == EXIT_INPUT and "error" in err


def test_radius_missing_file(tmp_path, capsys):
    code, _, _ = _run(capsys, ["radius", "--op", str(tmp_path / "none.json")])
    assert code == EXIT_INPUT


def test_radius_unsupported_method(tmp_path, capsys):
    op = _op_file(tmp_path, {"space": "hilbert(2, real)", "matrix": [[1, 0], [0, 1]]})
    code, _, err = _run(capsys, ["radius", "--op", op, "--method", "exact"])
    assert code == EXIT_UNSUPPORTED and "unsupported" in err


def test_load_operator_real_cast(tmp_path):
    T = load_operator(_op_file(tmp_path, {"space": "linf(2)", "matrix": [["1+0j", 0], [0, 2]]}))
    assert T.matrix.dtype.kind == "f" and T.matrix[1, 1] == 2.0


def test_index_known_and_oracle(capsys):
    code, out, _ = _run(capsys, ["index", "--space", "linf(2)", "--starts", "4", "--budget", "100",
                                 "--oracle"])
    res = json.loads(out)
    assert code == 0
    assert res["known_value"] == {"value": 1.0, "citation": "L/M-space"}
    assert abs(res["oracle_value"] - 1.0) <= 1e-9 and res["oracle_grid"]["points"] >= 200_000
    assert abs(res["upper"] - 1.0) <= 1e-9
    assert res["metadata"]["starts"] == 4


def test_index_oracle_rejects_3d(capsys):
    code, _, _ = _run(capsys, ["index", "--space", "linf(3)", "--starts", "2", "--budget", "50",
                               "--oracle"])
    assert code == EXIT_UNSUPPORTED


def test_verify_predicates(capsys):
    code, out, _ = _run(capsys, ["verify", "lush", "--space", "hexquot", "--grid", "16"])
    res = json.loads(out)
    assert code == 0 and res["pass"] is False and res["witnesses"]
    assert res["stats"]["checked"] == 16 * 16 * 3
    code, out, _ = _run(capsys, ["verify", "almostcl", "--space", "linf(3)"])
    assert code == 0 and json.loads(out)["pass"] is True
    code, out, _ = _run(capsys, ["verify", "pairs", "--space", "hexquot"])
    res = json.loads(out)
    assert code == 0 and res["pass"] is False and res["stats"]["minimum"] < 0.9


def test_verify_needs_space(capsys):
    assert main(["verify", "lush"]) == EXIT_INPUT
    assert main(["verify", "crich"]) == EXIT_INPUT
    capsys.readouterr()


def test_verify_crich(tmp_path, capsys):
    p = tmp_path / "k.json"
    p.write_text(json.dumps({"sequences": [{"name": "n", "limit": "inf"}],
                             "functionals": [{"atoms": {"inf": 1}}],
                             "open_set": {"points": [], "tails": {"n": 3}}, "epsilon": 0.25}))
    code, out, _ = _run(capsys, ["verify", "crich", "--kmodel", str(p)])
    res = json.loads(out)
    assert code == 0 and res["pass"] is True and len(res["witnesses"]) == 1
    assert res["stats"]["distance"] <= 1e-9


def test_verify_bad_eps(capsys):
    with pytest.raises(SystemExit):
        main(["verify", "lush", "--space", "linf(2)", "--eps", "a,b"])
    capsys.readouterr()


# ---------------------------------------------------------------- reproduce

def test_reproduce_json_and_filter(capsys):
    code, out, _ = _run(capsys, ["reproduce", "--claims", FAST])
    res = json.loads(out)
    assert code == 0 and res["all_pass"]
    assert [c["claim_id"] for c in res["claims"]] == sorted(FAST.split(","))


def test_reproduce_unknown_claim(capsys):
    code, _, err = _run(capsys, ["reproduce", "--claims", "no-such-claim"])
    assert code == EXIT_INPUT and "no-such-claim" in err
    with pytest.raises(InputError):
        run_reproduce(RunConfig(), ["no-such-claim"])


def test_reproduce_byte_stable_without_timing(tmp_path, capsys):
    outs = []
    for k in range(2):
        path = tmp_path / f"r{k}.csv"
        code = main(["reproduce", "--claims", FAST, "--format", "csv", "--no-timing", "--out", str(path)])
        assert code == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    rows = list(csv.DictReader(io.StringIO(outs[0].decode())))
    assert list(rows[0]) == ["claim_id", "expected", "computed", "tol", "pass", "runtime"]
    assert {r["runtime"] for r in rows} == {"-"}
    capsys.readouterr()


def test_reproduce_markdown(capsys):
    code, out, _ = _run(capsys, ["reproduce", "--claims", "extreme-pairs", "--format", "markdown"])
    lines = out.splitlines()
    assert code == 0 and lines[0].startswith("| claim_id") and "extreme-pairs" in lines[2]


def test_reproduce_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# run settings\nseed = 3\nformat = csv  # trailing comment\ntiming = off\n")
    code, out, _ = _run(capsys, ["reproduce", "--claims", "extreme-pairs", "--config", str(cfg)])
    assert code == 0 and out.startswith("claim_id,") and out.rstrip().endswith(",-")


@pytest.mark.parametrize("text", ["seed 3", "colour = red", "seed = x", "threads = 0", "format = xml"])
def test_config_errors(tmp_path, text):
    p = tmp_path / "bad.cfg"
    p.write_text(text + "\n")
    with pytest.raises(InputError):
        RunConfig.from_file(p)


def test_config_overrides_and_env(tmp_path):
    p = tmp_path / "c.cfg"
    p.write_text("seed = 1\nthreads = 2\n")
    cfg = RunConfig.from_file(p, seed=9, format=None)
    assert cfg.seed == 9 and cfg.threads == 2 and cfg.format == "json"
    assert cfg.with_env({"NUMLAB_THREADS": "4"}).threads == 4
    assert cfg.with_env({}).threads == 2
    with pytest.raises(InputError):
        cfg.with_env({"NUMLAB_THREADS": "many"})
    with pytest.raises(InputError):
        RunConfig.from_file(tmp_path / "missing.cfg")


def test_claim_seed_stable():
    assert claim_seed(0, "a") == claim_seed(0, "a")
    assert claim_seed(0, "a") != claim_seed(1, "a")
    assert 0 <= claim_seed(7, "sum-formula") < 2**32


def test_registry_has_all_claims():
    assert len(claim_ids()) == 15 and "range-bounds" in claim_ids()


def test_render_sorted_and_numbers():
    rs = [ClaimResult("b", "", 0.5, "", 1 / 3, 1e-9, True, 1.0),
          ClaimResult("a", "", True, "", False, 0, False, 2.0)]
    out = render_report(rs, "csv", timing=False)
    assert out.splitlines()[1:] == ["a,true,false,0,false,-", "b,0.5,0.333333333333,1e-09,true,-"]
    js = json.loads(render_report(rs, "json"))
    assert [c["claim_id"] for c in js["claims"]] == ["a", "b"] and js["all_pass"] is False
    with pytest.raises(InputError):
        render_report(rs, "xml")


def test_reproduce_threads_match_serial():
    ids = FAST.split(",")
    a = run_reproduce(RunConfig(timing=False), ids)
    b = run_reproduce(RunConfig(threads=2, timing=False), ids)
    assert render_report(a, "csv", False) == render_report(b, "csv", False)


def test_hilbert_complex_claim(monkeypatch):
    monkeypatch.delenv("NUMLAB_THREADS", raising=False)
    (r,) = run_reproduce(RunConfig(), ["hilbert-complex-half"])
    assert r.passed and r.expected == 0.5 and abs(r.computed - 0.5) <= r.tolerance
