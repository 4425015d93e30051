import json

import pytest

from uncloneable import __version__
from uncloneable.adversary import parse_attack
from uncloneable.analysis import uncloneability_scan
from uncloneable.cli import main
from uncloneable.codes import trivial_config


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def files(tmp_path, capsys):
    p, k = tmp_path / "p.txt", tmp_path / "k.txt"
    assert main(["params", "--n", "2", "--s", "2", "--delta", "0", "--eta", "0",
                 "--out", str(p)]) == 0
    assert main(["keygen", "--params", str(p), "--seed", "1", "--out", str(k)]) == 0
    capsys.readouterr()
    return tmp_path, p, k


def test_params_gives_trivial_config(files):
    _, p, _ = files
    text = p.read_text()
    for line in ["N = 4", "K = 4", "K2 = 4", "H1 = 0x4:"]:
        assert line in text


@pytest.mark.parametrize("engine", ["exact", "sampled"])
def test_round_trip(files, capsys, engine):
    d, p, k = files
    t = d / "t.txt"
    assert main(["encrypt", "--params", str(p), "--key", str(k), "--message", "10",
                 "--engine", engine, "--seed", "2", "--out", str(t)]) == 0
    code, out, _ = run(["decrypt", "--params", str(p), "--key", str(k), "--tx", str(t)], capsys)
    assert code == 0 and out.strip() == "ACC 10"


def test_steal_gives_exit_1(files, capsys):
    d, p, k = files
    t, t2 = d / "t.txt", d / "t2.txt"
    main(["encrypt", "--params", str(p), "--key", str(k), "--message", "01", "--out", str(t)])
    main(["attack", "--params", str(p), "--tx", str(t), "--attack", "steal", "--out", str(t2)])
    code, out, _ = run(["decrypt", "--params", str(p), "--key", str(k), "--tx", str(t2)], capsys)
    assert code == 1 and out.startswith("REJ missing")


def test_outputs_are_byte_reproducible(files):
    d, p, k = files
    outs = []
    for name in ("a", "b"):
        path = d / f"{name}.txt"
        main(["encrypt", "--params", str(p), "--key", str(k), "--message", "11",
              "--seed", "9", "--out", str(path)])
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    k2 = d / "k2.txt"
    main(["keygen", "--params", str(p), "--seed", "1", "--out", str(k2)])
    assert k2.read_bytes() == k.read_bytes()


def test_malformed_key_file(files, capsys):
    d, p, k = files
    bad = d / "bad.txt"
    bad.write_text(k.read_text().replace("e = 4:", "e = 4:z"))
    t = d / "t.txt"
    code, _, err = run(["encrypt", "--params", str(p), "--key", str(bad), "--message", "00",
                        "--out", str(t)], capsys)
    assert code == 2 and "bad.txt:" in err and "[e]" in err


def test_usage_error(capsys):
    assert run(["encrypt"], capsys)[0] == 2
    assert run(["nonsense"], capsys)[0] == 2


def test_verify_def1(files, capsys):
    _, p, _ = files
    code, out, _ = run(["verify", "--suite", "def1", "--params", str(p), "--seed", "4"], capsys)
    report = json.loads(out)
    assert code == 0 and report["encryption_error"] <= 1e-10
    assert report["seed"] == 4 and report["tool_version"] == __version__
    assert len(report["config_digest"]) == 16


def test_verify_refuses_other_digest(files, capsys):
    _, p, _ = files
    code, _, err = run(["verify", "--suite", "def1", "--params", str(p),
                        "--expect-digest", "0123456789abcdef"], capsys)
    assert code == 2 and "digest" in err


def test_verify_def2_and_sweep(capsys):
    code, out, _ = run(["verify", "--suite", "def2", "--attack", "ir-z"], capsys)
    report = json.loads(out)
    expected = uncloneability_scan(parse_attack("ir-z"), trivial_config(), 0, 1, seed=0)
    assert code == 0 and report["epsilon_empirical"] == expected.epsilon_empirical
    code, out, _ = run(["verify", "--suite", "sweep"], capsys)
    assert code == 0 and len(json.loads(out)["rows"]) == 255


def test_qkd(capsys):
    code, out, _ = run(["qkd", "--mode", "direct", "--seed", "5"], capsys)
    assert code == 0 and json.loads(out)["keys_match"]
    assert run(["qkd", "--attack", "steal"], capsys)[0] == 1
    code, out, _ = run(["qkd", "--mode", "sifted", "--raw-qubits", "64"], capsys)
    assert code == 0 and json.loads(out)["sift"]["kept"] > 0


def test_distinguish(capsys):
    code, out, _ = run(["distinguish", "--prg", "block:1", "--trials", "100", "--seed", "1"],
                       capsys)
    report = json.loads(out)
    assert code == 0 and report["advantage"] > 0.2
    assert report["prg"]["verdict"] == "pseudorandom"


def test_bench(capsys):
    code, out, _ = run(["bench", "--runs", "5"], capsys)
    assert code == 0 and "timings_seconds" in json.loads(out)
