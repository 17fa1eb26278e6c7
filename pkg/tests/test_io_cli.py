import json

import numpy as np
import pytest

from vosperstab import DensityFunction, GrowthFunction, ParseError, TorusHom, final_arl
from vosperstab.cli import main
from vosperstab.generators import ap_plus_noise, generate
from vosperstab.io import (SetRecord, decomposition_from_dict, decomposition_to_dict, dumps, envelope,
                           load_decomposition, load_set, strip_timestamp)
from vosperstab.vosper import bohr_set


def test_set_roundtrip_byte_identical():
    rec = ap_plus_noise(1009, 50, 3, diff=37, seed=5)
    text = rec.dumps()
    again = load_set(text.encode())
    assert again == rec
    assert again.dumps() == text


@pytest.mark.parametrize("text, needle", [
    ('{"format": "vosperstab.set/1", "p": 7, "members": [1, 2,', None),
    ('{"format": "vosperstab.set/1", "p": 8, "members": [1]}', '"p"'),
    ('{"format": "vosperstab.set/1", "p": 7, "members": [3, 1]}', '"members"'),
    ('{"format": "vosperstab.set/1", "p": 7, "members": [1, 9]}', '"members"'),
    ('{"format": "vosperstab.set/1", "p": 7, "members": [1], "extra": 0}', '"extra"'),
])
def test_corrupt_set_reports_byte_offset(text, needle):
    with pytest.raises(ParseError) as e:
        load_set(text.encode())
    if needle is None:
        assert e.value.offset == len(text.encode())
    else:
        assert e.value.offset == text.index(needle)


def test_invalid_utf8_offset():
    data = b'{"p": 7, \xff}'
    with pytest.raises(ParseError) as e:
        load_set(data)
    assert e.value.offset == data.index(b"\xff")


def test_decomposition_roundtrip():
    f = ap_plus_noise(401, 40, 1, seed=3).residue_set().indicator()
    dec = final_arl(f, 0.3, GrowthFunction.affine(1, 3))
    text = dumps(decomposition_to_dict(dec))
    back = load_decomposition(text)
    assert dumps(decomposition_to_dict(back)) == text
    assert np.array_equal(back.f_str.values, dec.f_str.values)
    assert back.M == dec.M and back.phi == dec.phi
    wrapped = dumps(envelope("decomposition", json.loads(text), {}, 0))
    assert dumps(decomposition_to_dict(load_decomposition(wrapped))) == text
    with pytest.raises(ParseError):
        decomposition_from_dict({"format": "other"})


def test_envelope_reruns_identical_after_timestamp():
    a = dumps(envelope("x", {"v": 0.1}, {"t": 0.02}, 7, timestamp="2020-01-01T00:00:00+00:00"))
    b = dumps(envelope("x", {"v": 0.1}, {"t": 0.02}, 7))
    assert a != b and strip_timestamp(a) == strip_timestamp(b)


def test_float_roundtrip_exact():
    x = [0.1, 1 / 3, 2.0**-52, 1e300, np.pi]
    assert json.loads(dumps(x)) == x


def test_generators_deterministic():
    a = generate("ap-plus-noise", 1009, seed=7, length=50, outliers=2)
    b = generate("ap-plus-noise", 1009, seed=7, length=50, outliers=2)
    assert a == b
    assert len(a.members) == 52
    c = generate("random", 211, seed=1, density=0.2)
    assert len(c.members) == round(0.2 * 211)


def test_cli_generate_deterministic(tmp_path, capsys):
    args = ["generate", "ap-plus-noise", "-p", "1009", "--seed", "7", "--param", "length=50", "--param",
            "outliers=2"]
    assert main(args) == 0
    first = capsys.readouterr().out
    out = tmp_path / "s.json"
    assert main(args + ["--out", str(out)]) == 0
    assert out.read_text() == first
    assert load_set(first) == generate("ap-plus-noise", 1009, seed=7, length=50, outliers=2)


def test_cli_bohr_sample_matches_bohr_set(capsys):
    assert main(["generate", "bohr-sample", "-p", "211", "--param", "freqs=3,50", "--param", "radius=0.1"]) == 0
    rec = load_set(capsys.readouterr().out)
    assert rec.members == tuple(bohr_set(TorusHom(211, (3, 50)), 0.1).members)


def test_cli_decompose_constant(tmp_path, capsys):
    out = tmp_path / "d.json"
    assert main(["decompose", "-p", "101", "--constant", "0.4", "--out", str(out)]) == 0
    assert "M=1 " in capsys.readouterr().out
    dec = load_decomposition(out.read_bytes())
    assert dec.M == 1
    assert dec.f_str.allclose(DensityFunction.constant(101, 0.4), atol=1e-13)


def test_cli_verify_statuses(tmp_path, capsys):
    s = tmp_path / "s.json"
    s.write_text(ap_plus_noise(1009, 50, 1, seed=1).dumps())
    assert main(["verify", "--set", str(s), "-t", "0.01", "--json"]) == 0
    text = capsys.readouterr().out
    env = json.loads(text[text.index("\n{") + 1:])
    assert env["kind"] == "verification" and env["result"]["status"] == "covered"
    out = tmp_path / "v.json"
    assert main(["verify", "--set", str(s), "-t", "0.01", "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "status: covered" in text
    res = json.loads(out.read_text())["result"]
    assert res["status"] == "covered" and res["A_minus_P"] == 1
    assert main(["verify", "--gen", "random", "-p", "1009", "--gen-param", "density=0.2", "--seed", "1"]) == 0
    assert "status: hypothesis-not-met" in capsys.readouterr().out


def test_cli_oracle_lattice(capsys, monkeypatch):
    monkeypatch.setenv("VOSPERSTAB_THREADS", "2")
    assert main(["oracle", "lattice"]) == 0
    assert "[FAIL]" not in capsys.readouterr().out


def test_cli_usage_errors(tmp_path, capsys):
    with pytest.raises(SystemExit) as e:
        main(["oracle", "nonsense"])
    assert e.value.code == 2
    assert main(["verify", "-t", "0.01"]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{"format": "vosperstab.set/1", "p": 7, ')
    assert main(["verify", "--set", str(bad)]) == 2
    assert "parse error" in capsys.readouterr().err
    assert main(["bezout", "2,4", "--target", "3", "-K", "5"]) == 2


def test_cli_cap_exit_code(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"caps": {"box_cap": 10}}))
    assert main(["independence", "-p", "1009", "--freqs", "1,57,300", "-K", "10", "--method", "box",
                 "--config", str(cfg)]) == 3


def test_cli_small_commands(capsys):
    assert main(["complete-matrix", "3,4"]) == 0
    assert "det = 25" in capsys.readouterr().out
    assert main(["bezout", "2,3", "--target", "1", "-K", "3"]) == 0
    assert main(["independence", "-p", "7", "--freqs", "1,3", "-K", "3"]) == 0
    assert "relation [1, 2]" in capsys.readouterr().out
    assert main(["reduce-dim", "-p", "7", "--freqs", "1,3", "--relation", "1,2"]) == 0
    assert main(["fejer", "-d", "2", "-K", "4"]) == 0
    assert main(["ledger", "--alpha1", "0.02", "--alpha2", "0.24", "--eta", "0.1", "--delta", "0.1",
                 "--M0", "10"]) == 0
    assert main(["sumset", "--gen", "ap", "-p", "101", "--gen-param", "length=10"]) == 0
    assert main(["ap-cover", "--gen", "ap", "-p", "101", "--gen-param", "length=10", "--gen-param", "diff=7"]) == 0
    assert main(["popdouble", "--gen", "ap", "-p", "101", "--gen-param", "length=10", "--thresholds",
                 "0.01", "0.05", "0.1"]) == 0
