import json

import pytest

from edfix import cli
from edfix.cli import main
from edfix.gen import GenProfile, gen_instance, mutate
from edfix.instance import Instance, canonical, instance_hash, parse_instance, save_instance
from edfix.errors import MalformedInputError, MutationSkipped
from edfix.mt import PiecewiseLinearGauge
from edfix.solver import MultivaluedMap, TheoremReport, Verdict
from edfix.spaces import DistanceFunction, FiniteMetricSpace


def line_instance(images=((1,), (1,), (2,)), kappa=None, **kw):
    space = FiniteMetricSpace.on_line([0, 1, 3], ["p0", "p1", "p2"])
    k = DistanceFunction(space, kappa) if kappa is not None else DistanceFunction.of_metric(space)
    return Instance(space, k, MultivaluedMap(images), mu=PiecewiseLinearGauge.constant(0.9), **kw)


@pytest.fixture
def write(tmp_path):
    def _write(inst, name="inst.json"):
        path = tmp_path / name
        save_instance(inst, path)
        return str(path)
    return _write


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_check_axioms(write, capsys):
    code, out, _ = run(capsys, "check", write(line_instance()))
    assert code == 0 and json.loads(out)["verdicts"]["is_e0_distance"] == "pass"


def test_check_zero_offdiagonal(write, capsys):
    inst = line_instance(kappa=[[0, 0, 3], [1, 0, 2], [3, 2, 0]])
    code, out, _ = run(capsys, "check", write(inst))
    report = json.loads(out)
    assert code == 1 and report["verdicts"]["tau3"] == "fail" and "tau3" in report["witnesses"]


def test_check_mt(write, capsys):
    assert run(capsys, "check-mt", write(line_instance()))[0] == 0
    assert run(capsys, "check", "--what", "mt", write(line_instance()))[0] == 0


def test_truncated_json(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(canonical(line_instance())[:40])
    code, out, err = run(capsys, "check", str(path))
    assert code == 2 and out == "" and "line 1 column" in err


def test_missing_file(capsys):
    assert run(capsys, "check", "/nonexistent/x.json")[0] == 2


def test_dist(write, capsys):
    f = write(line_instance())
    code, out, _ = run(capsys, "dkappa", f, "p0,p1", "p2")
    assert code == 0 and json.loads(out)["value"] == 3
    assert json.loads(run(capsys, "dist", f, "p0,p1", "p0,p1")[1])["value"] == 0
    assert json.loads(run(capsys, "dist", "--flavor", "xi", f, "p2", "p0,p1")[1])["value"] == 2
    assert json.loads(run(capsys, "hausdorff", f, "p0,p2", "p1")[1])["value"] == 2
    assert run(capsys, "dkappa", f, "p0,p9", "p2")[0] == 2


def test_solve(write, capsys):
    f = write(line_instance())
    code, out, _ = run(capsys, "solve", f, "--x0", "p0")
    assert code == 0 and json.loads(out)["fixed_point"] == "p1"
    code, out, _ = run(capsys, "solve", f, "--x0", "p2")
    assert code == 0 and json.loads(out)["points"] == ["p2"]
    swap = write(line_instance(images=((1,), (0,), (2,))), "swap.json")
    code, out, _ = run(capsys, "solve", swap, "--x0", "p0")
    assert code == 1 and json.loads(out)["outcome"] == "iteration-cap"
    assert run(capsys, "solve", swap, "--x0", "p0", "--max-iter", "0")[0] == 2


def test_verify(write, capsys):
    assert run(capsys, "verify", write(line_instance()), "--theorem", "T2.2")[0] == 0
    assert run(capsys, "verify", write(line_instance(images=((1,), (2,), (2,)))), "--theorem", "T2.1")[0] == 1
    assert run(capsys, "verify", write(line_instance()), "--theorem", "T2.3")[0] == 2
    assert run(capsys, "verify", write(line_instance()))[0] == 2


def test_verify_drop_z_mutant(write, capsys):
    for seed in range(20):
        inst = gen_instance(GenProfile(seed=seed, n_points=6, theorem_target="T2.1"))
        assert run(capsys, "verify", write(inst))[0] == 0
        try:
            mutant, _ = mutate(inst, "drop-z", seed)
        except MutationSkipped:
            continue
        assert run(capsys, "verify", write(mutant, "m.json"))[0] == 1
        return
    pytest.fail("no drop-z mutant found")


def test_theorem_violation_exit_code(write, capsys, monkeypatch):
    # a sound checker never reports this, so substitute the report
    fake = TheoremReport("T2.1", {"S1": Verdict(True)}, {"fixed_point_exists": False}, (), None)
    monkeypatch.setattr(cli, "verify_theorem", lambda inst, which: fake)
    assert run(capsys, "verify", write(line_instance()), "--theorem", "T2.1")[0] == 3


def test_verify_dir(tmp_path, capsys):
    for seed in range(4):
        save_instance(gen_instance(GenProfile(seed=seed, n_points=5, theorem_target="T2.4")), tmp_path / f"i{seed}.json")
    code, out, _ = run(capsys, "verify", "--dir", str(tmp_path))
    report = json.loads(out)
    assert code == 0 and report["counts"]["pass"] == 4
    assert [r["file"] for r in report["results"]] == sorted(r["file"] for r in report["results"])
    (tmp_path / "z.json").write_text("{")
    assert run(capsys, "verify", "--dir", str(tmp_path))[0] == 2


def test_gen_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    args = ["gen", "--seed", "7", "--n", "6", "--theorem", "T2.3", "--profile", "kappa_kind=asymmetric-closure,map-kind=funnel"]
    code, out, _ = run(capsys, *args, "--out", str(a))
    assert code == 0
    h = json.loads(out)["hash"]
    run(capsys, *args, "--out", str(b))
    assert a.read_bytes() == b.read_bytes()
    assert instance_hash(parse_instance(a.read_text())) == h
    assert run(capsys, "gen", "--n", "1")[0] == 2
    assert run(capsys, "gen", "--profile", "colour=red")[0] == 2
    assert run(capsys, "gen", "--profile", "oops")[0] == 2


def test_run_log(write, tmp_path, capsys):
    log = tmp_path / "runs.jsonl"
    f = write(line_instance())
    run(capsys, "--log", str(log), "check", f)
    run(capsys, "--log", str(log), "solve", f, "--x0", "p0")
    records = [json.loads(line) for line in log.read_text().splitlines()]
    assert [r["command"] for r in records] == ["check", "solve"]
    assert all({"arguments", "instance_hash", "report", "wall_time", "version", "exit_code"} <= set(r) for r in records)


def test_bad_usage(capsys):
    assert run(capsys, "frobnicate")[0] == 2


@pytest.mark.parametrize("mutate_obj", [
    lambda o: o.pop("kappa"),
    lambda o: o.__setitem__("schema_version", "2"),
    lambda o: o["map_T"].__setitem__("p0", []),
    lambda o: o["map_T"].__setitem__("p0", ["p7"]),
    lambda o: o.__setitem__("metric", [[0, 1], [1, 0]]),
    lambda o: o.__setitem__("phi", {"p0": "p0"}),
    lambda o: o.__setitem__("L", "large"),
    lambda o: o["mu"].__setitem__("point_values", [1.5]),
])
def test_malformed_instances(mutate_obj):
    obj = line_instance().to_json()
    mutate_obj(obj)
    with pytest.raises(MalformedInputError):
        parse_instance(json.dumps(obj))


def test_canonical_round_trip():
    for seed in range(20):
        inst = gen_instance(GenProfile(seed=seed, n_points=7, theorem_target=("T2.3", "T2.4")[seed % 2],
                                       kappa_kind="asymmetric-closure"))
        text = canonical(inst)
        assert canonical(parse_instance(text)) == text
