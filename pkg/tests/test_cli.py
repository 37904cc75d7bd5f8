import json

import numpy as np
import pandas as pd
import pytest

from cli.commands import (EXIT_BUDGET, EXIT_DECODE, EXIT_OK, EXIT_USAGE, main, output_paths, parse_indices,
                          parse_rates)
from codes.private_ldc import gen
from compiler.container import read_container, write_container
from models.data_models import BitString, SecretKey
from models.errors import ConfigValidationError
from models.reports import read_csv_config

SMALL = ["--lam", "16", "--m", "16"]


@pytest.fixture
def workdir(tmp_path):
    (tmp_path / "msg.bin").write_bytes(b"idlc")
    return tmp_path


def run(workdir, *argv):
    return main([*argv, "--db", str(workdir / "runs.sqlite3")])


def encode(workdir, codec="priv-hamming-v1", *extra):
    return run(workdir, "encode", "--codec", codec, *SMALL, "--input", str(workdir / "msg.bin"),
               "--out", str(workdir / "msg.idlc"), *extra)


def test_parsers():
    assert parse_indices("all") is None
    assert parse_indices(None) is None
    assert parse_indices("0, 3,7") == [0, 3, 7]
    with pytest.raises(ConfigValidationError):
        parse_indices("1,x")
    assert parse_rates("0,0.5") == [0.0, 0.5]
    assert parse_rates(None)[0] == 0.0
    assert output_paths("out/report.json") == ("out/report.json", "out/report.csv")
    assert output_paths("out/report") == ("out/report.json", "out/report.csv")


def test_encode_writes_container_key_and_sidecar(workdir, capsys):
    assert encode(workdir) == EXIT_OK
    word, header, meta = read_container(str(workdir / "msg.idlc"))
    assert meta["message_bits"] == 32 and meta["pad"] == 0
    assert meta["config"]["k"] == 32
    assert word.length == meta["n"] == 128
    assert (workdir / "msg.idlc.key").exists()
    assert oct((workdir / "msg.idlc.key").stat().st_mode & 0o777) == "0o600"
    assert "n=128" in capsys.readouterr().out


def test_encode_reuses_an_existing_key(workdir):
    encode(workdir)
    first = (workdir / "msg.idlc").read_bytes()
    encode(workdir)
    assert (workdir / "msg.idlc").read_bytes() == first


def test_encode_rejects_empty_and_oversized_input(workdir):
    (workdir / "msg.bin").write_bytes(b"")
    assert encode(workdir) == EXIT_USAGE
    (workdir / "msg.bin").write_bytes(b"toolong")
    assert encode(workdir, "priv-hamming-v1", "--k", "16") == EXIT_USAGE


def test_round_trip_through_a_quiet_channel(workdir, capsys):
    encode(workdir)
    assert run(workdir, "corrupt", "--input", str(workdir / "msg.idlc"), "--channel", "random_flip",
               "--rate", "0", "--out", str(workdir / "same.idlc")) == EXIT_OK
    assert (workdir / "same.idlc").read_bytes() == (workdir / "msg.idlc").read_bytes()
    _, _, meta = read_container(str(workdir / "same.idlc"))
    assert meta["corruption"]["achieved_edit_distance"] == 0.0

    capsys.readouterr()
    out = workdir / "decoded.json"
    assert run(workdir, "decode", "--input", str(workdir / "same.idlc"), "--out", str(out)) == EXIT_OK
    result = json.loads(out.read_text())
    rows = result["rows"]
    assert read_csv_config(str(workdir / "decoded.csv")) == result["config"]
    assert pd.read_csv(workdir / "decoded.csv", comment="#")["value"].tolist() == [r["value"] for r in rows]
    bits = "".join(str(r["value"]) for r in rows)
    assert bits == str(BitString.from_packed(b"idlc", 32))
    assert all(r["queries"] == 64 for r in rows)
    assert (workdir / "decoded.csv").exists()


def test_compiled_round_trip_with_insertions(workdir):
    assert encode(workdir, "priv-insdel-v1") == EXIT_OK
    assert run(workdir, "corrupt", "--input", str(workdir / "msg.idlc"), "--channel", "random_insdel",
               "--rate", "0.002", "--seed", "3", "--out", str(workdir / "bad.idlc")) == EXIT_OK
    out = workdir / "decoded.json"
    assert run(workdir, "decode", "--input", str(workdir / "bad.idlc"), "--index", "0,31",
               "--out", str(out)) == EXIT_OK
    rows = json.loads(out.read_text())["rows"]
    expected = str(BitString.from_packed(b"idlc", 32))
    assert [str(r["value"]) for r in rows] == [expected[0], expected[31]]


def test_decode_rejects_bad_indices_and_keys(workdir):
    encode(workdir)
    path = str(workdir / "msg.idlc")
    assert run(workdir, "decode", "--input", path, "--index", "32") == EXIT_USAGE
    (workdir / "other.bin").write_bytes(b"x")
    run(workdir, "encode", "--codec", "priv-hamming-v1", *SMALL, "--input", str(workdir / "other.bin"),
        "--out", str(workdir / "other.idlc"))
    assert run(workdir, "decode", "--input", path, "--key", str(workdir / "other.idlc.key")) == EXIT_USAGE


def test_encode_keys_do_not_follow_the_public_seed(tmp_path):
    fingerprints = []
    for name in ("a", "b"):
        workdir = tmp_path / name
        workdir.mkdir()
        (workdir / "msg.bin").write_bytes(b"idlc")
        assert encode(workdir) == EXIT_OK
        _, _, meta = read_container(str(workdir / "msg.idlc"))
        fingerprints.append(meta["key_fingerprint"])
        seeded = gen(16, np.random.default_rng(meta["config"]["seed"]))
        assert SecretKey.from_bytes((workdir / "msg.idlc.key").read_bytes()) != seeded
        assert seeded.fingerprint() != meta["key_fingerprint"]
    assert fingerprints[0] != fingerprints[1]


def test_decode_failure_exit_code(workdir):
    encode(workdir)
    word, header, meta = read_container(str(workdir / "msg.idlc"))
    noise = BitString.random(word.length, np.random.default_rng(0))
    write_container(str(workdir / "noise.idlc"), noise, header, meta)
    assert run(workdir, "decode", "--input", str(workdir / "noise.idlc"), "--index", "0") == EXIT_DECODE


def test_corrupt_refuses_keyed_channels(workdir):
    encode(workdir)
    assert run(workdir, "corrupt", "--input", str(workdir / "msg.idlc"), "--channel", "key_aware_block",
               "--rate", "0.1", "--out", str(workdir / "x.idlc")) == EXIT_USAGE


def test_game_command(workdir, capsys):
    out = workdir / "report.json"
    code = run(workdir, "game", "--codec", "priv-hamming-v1", *SMALL, "--k", "128", "--game", "one_time",
               "--channel", "key_aware_block", "--hamming-rate", "0.02", "--flips", "7", "--games", "2",
               "--workers", "1", "--out", str(out))
    assert code == EXIT_OK
    report = json.loads(out.read_text())
    assert report["summary"]["wins"] == 2
    assert len(report["reports"]) == 2
    assert report["reports"][0]["config"]["codec"] == "priv-hamming-v1"
    assert read_csv_config(str(workdir / "report.csv"))["channel"] == "key_aware_block"
    assert len(pd.read_csv(workdir / "report.csv", comment="#")) == 2
    assert "win_rate=1.0000" in capsys.readouterr().out


def test_game_config_file_with_overrides(workdir):
    config = workdir / "config.json"
    config.write_text(json.dumps({"command": "game", "codec": "priv-hamming-v1", "lam": 16, "m": 16, "k": 128,
                                  "game": "one_time", "channel": "identity", "games": 5}))
    out = workdir / "report.json"
    assert run(workdir, "game", "--config", str(config), "--games", "1", "--out", str(out)) == EXIT_OK
    report = json.loads(out.read_text())
    assert report["config"]["games"] == 1
    assert report["summary"]["wins"] == 0


def test_game_budget_abort_exit_code(workdir):
    code = run(workdir, "game", "--codec", "rb-insdel-v1", *SMALL, "--k", "32", "--T", "2", "--game", "c_secure",
               "--channel", "safe_function", "--hamming-rate", "0.05", "--budget-rounds", "2", "--rho", "0.1",
               "--workers", "1")
    assert code == EXIT_BUDGET


def test_invalid_config_is_a_usage_error(workdir):
    assert run(workdir, "game", "--lam", "8", "--k", "32") == EXIT_USAGE
    assert run(workdir, "game", "--codec", "priv-hamming-v1", *SMALL, "--k", "128",
               "--channel", "no_such_channel", "--workers", "1") == EXIT_USAGE


def test_calibrate_command(workdir):
    out = workdir / "calib.json"
    code = run(workdir, "calibrate", "--codec", "priv-insdel-v1", *SMALL, "--k", "32", "--channel", "random_insdel",
               "--rates", "0", "--trials", "3", "--workers", "1", "--out", str(out))
    assert code == EXIT_OK
    result = json.loads(out.read_text())
    assert result["guarantee"]["rho_fin"] == 0.0
    assert result["sweep"][0]["failures"] == 0
    assert (workdir / "calib.csv").exists()


def test_calibrate_needs_a_compiled_codec(workdir):
    assert run(workdir, "calibrate", "--codec", "priv-hamming-v1", *SMALL, "--k", "32", "--rates", "0",
               "--trials", "1") == EXIT_USAGE


def test_subprocess_channel_needs_a_command(workdir):
    assert run(workdir, "game", "--codec", "priv-hamming-v1", *SMALL, "--k", "128", "--channel", "subprocess",
               "--workers", "1") == EXIT_USAGE
