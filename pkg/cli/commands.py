"""
Batch experiment driver.

    python idlc.py encode --input msg.bin --out msg.idlc
    python idlc.py corrupt --input msg.idlc --channel random_insdel --rate 0.001 --out bad.idlc
    python idlc.py decode --input bad.idlc --key msg.idlc.key --index all
    python idlc.py game --codec priv-insdel-v1 --channel key_aware_block --out report.json
    python idlc.py calibrate --rates 0,0.002,0.004 --trials 200 --out calib.json

Exit codes: 0 success, 2 usage, 3 decode failure, 4 budget exceeded.
"""
import argparse
import json
import logging
import os
import shlex
import subprocess
import uuid
from dataclasses import asdict
from functools import lru_cache
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from channels.adversaries import ChannelContext, channel_ids, get_adversary
from codes.oracle import CountingView, QueryOracle
from codes.private_ldc import PrivateLDC, gen
from compiler.container import ContainerHeader, read_container, write_container
from config import (BASE_DIR, DB_CONFIG, DEFAULT_AMP, DEFAULT_BLOCK_BITS, DEFAULT_BUFFER, DEFAULT_CONFIDENCE,
                    DEFAULT_LAMBDA, DEFAULT_SEED, DEFAULT_TRIALS, MAX_GAME_ROUNDS, default_workers, output_lock)
from composed.resource_bounded import ResourceBoundedCode
from database.db_manager import DatabaseManager
from metrics.distances import edit_fractional
from models.data_models import BitString, SecretKey
from models.errors import (BudgetExceeded, ConfigValidationError, ContainerFormatError, DecodeFailure, EmptyInput,
                           IdlcError, KeyMismatch, MessageTooLong)
from models.reports import CODECS, GAMES, ExperimentConfig, write_csv
from services.calibration_service import CalibrationService
from services.experiment_service import ExperimentService, build_code

EXIT_OK, EXIT_USAGE, EXIT_DECODE, EXIT_BUDGET = 0, 2, 3, 4
KEYLESS_CHANNELS = ("identity", "random_flip", "bursty", "random_insdel", "zero_run_killer")
DEFAULT_RATES = (0.0, 0.0005, 0.001, 0.002, 0.004)


@lru_cache(maxsize=1)
def build_stamp() -> str:
    """`git describe` of the source tree, or "unknown" outside a checkout."""
    try:
        out = subprocess.run(["git", "describe", "--always", "--dirty", "--tags"], cwd=BASE_DIR,
                             capture_output=True, text=True, timeout=5)
        return out.stdout.strip() or "unknown"
    except (OSError, subprocess.SubprocessError):
        return "unknown"


def output_paths(out: str) -> Tuple[str, str]:
    """(JSON path, CSV path) sharing the stem of `out`."""
    stem, ext = os.path.splitext(out)
    if ext.lower() not in (".json", ".csv"):
        stem = out
    return stem + ".json", stem + ".csv"


def new_run_id(command: str) -> str:
    return f"{command}-{uuid.uuid4().hex[:12]}"


def write_key(path: str, sk: SecretKey) -> None:
    with output_lock(path):
        fd = os.open(path, os.O_WRONLY | os.O_CREAT | os.O_TRUNC, 0o600)
        with os.fdopen(fd, "wb") as f:
            f.write(sk.to_bytes())
        os.chmod(path, 0o600)


def read_key(path: str) -> SecretKey:
    with open(path, "rb") as f:
        return SecretKey.from_bytes(f.read())


def parse_indices(text: Optional[str]) -> Optional[List[int]]:
    """None for "all", else the comma-separated index list."""
    if text is None or text.strip().lower() == "all":
        return None
    try:
        return [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ConfigValidationError([f"indices: not a comma-separated integer list: {text!r}"]) from None


def parse_rates(text: Optional[str]) -> List[float]:
    if not text:
        return list(DEFAULT_RATES)
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise ConfigValidationError([f"rates: not a comma-separated number list: {text!r}"]) from None


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    """An ExperimentConfig from --config (if given) overlaid with explicit flags."""
    data: Dict[str, Any] = {}
    if getattr(args, "config", None):
        with open(args.config, encoding="utf-8") as f:
            data = json.load(f)
    data["command"] = args.command
    for name in ("codec", "lam", "k", "m", "T", "channel", "rate", "hamming_rate", "flips", "game", "rounds",
                 "games", "trials", "confidence", "p", "rho", "seed", "b", "beta", "amp", "budget_rounds", "key",
                 "input", "out"):
        value = getattr(args, name, None)
        if value is not None:
            data[name] = value
    if getattr(args, "adversary_cmd", None):
        data["adversary_cmd"] = shlex.split(args.adversary_cmd)
    if getattr(args, "single_time", False):
        data["multi_time"] = False
    if getattr(args, "rates", None) is not None:
        data["rates"] = parse_rates(args.rates)
    return ExperimentConfig.from_dict(data)


def _header_for(code, word: BitString) -> ContainerHeader:
    if isinstance(code, PrivateLDC):
        return ContainerHeader(K=code.K, q2=2, b=0, beta=0, idx_bits=0, nbits=word.length)
    return ContainerHeader.for_params(code.compiler, word.length)


def _check_header(code, header: ContainerHeader) -> None:
    expected = _header_for(code, BitString.zeros(0))
    if (header.K, header.q2, header.b, header.beta, header.idx_bits) != \
            (expected.K, expected.q2, expected.b, expected.beta, expected.idx_bits):
        raise KeyMismatch(f"container parameters {header} do not match the {code.codec_id} code of its config")


def cmd_encode(args: argparse.Namespace) -> int:
    with open(args.input, "rb") as f:
        data = f.read()
    if not data:
        raise EmptyInput("refusing to encode an empty message")
    message_bits = 8 * len(data)
    if args.k is None:
        args.k = message_bits
    if message_bits > args.k:
        raise MessageTooLong(f"message of {message_bits} bits exceeds k={args.k}")
    config = config_from_args(args).validate(MAX_GAME_ROUNDS)
    x = BitString.concat([BitString.from_packed(data, message_bits), BitString.zeros(config.k - message_bits)])
    code = build_code(config)
    rng = np.random.default_rng(config.seed)

    meta: Dict[str, Any] = {"config": config.to_dict(), "build_stamp": build_stamp(),
                            "message_bits": message_bits, "pad": config.k - message_bits}
    if isinstance(code, ResourceBoundedCode):
        word = code.encode(x, rng)
        fingerprint = "-"
    else:
        key_path = config.key or config.out + ".key"
        if os.path.exists(key_path):
            sk = read_key(key_path)
            if sk.lam != config.lam:
                raise KeyMismatch(f"key in {key_path} is for lambda={sk.lam}, not {config.lam}")
        else:
            sk = gen(config.lam)
            write_key(key_path, sk)
        word = code.encode(x, sk)
        fingerprint = sk.fingerprint()
        meta.update(key_path=key_path, key_fingerprint=fingerprint)
    meta.update(n=word.length, rate=config.k / word.length)

    with output_lock(config.out):
        write_container(config.out, word, _header_for(code, word), meta)
    DatabaseManager(args.db).record_run(new_run_id("encode"), "encode", config.codec, config.to_dict(), build_stamp(),
                                        {"n": word.length})
    print(f"n={word.length} rate={config.k / word.length:.6f} key={fingerprint}")
    return EXIT_OK


def cmd_corrupt(args: argparse.Namespace) -> int:
    if args.channel not in KEYLESS_CHANNELS:
        raise ConfigValidationError([f"channel: {args.channel!r} needs a game context; "
                                     f"file channels are {', '.join(KEYLESS_CHANNELS)}"])
    word, header, meta = read_container(args.input)
    adversary = get_adversary(args.channel)
    rng = np.random.default_rng(args.seed)
    corrupted = adversary(ChannelContext(code=None, x=BitString.zeros(0), rate=args.rate, rng=rng), word)
    achieved = float(edit_fractional(word, corrupted)) if word.length else 0.0

    out_meta = dict(meta)
    out_meta["corruption"] = {"channel": args.channel, "rate": args.rate, "seed": args.seed,
                              "achieved_edit_distance": achieved, "source": os.path.abspath(args.input)}
    out_meta["build_stamp"] = build_stamp()
    with output_lock(args.out):
        write_container(args.out, corrupted, ContainerHeader(header.K, header.q2, header.b, header.beta,
                                                             header.idx_bits, corrupted.length), out_meta)
    DatabaseManager(args.db).record_run(new_run_id("corrupt"), "corrupt", meta.get("config", {}).get("codec"),
                                        out_meta["corruption"], build_stamp())
    print(f"channel={args.channel} rate={args.rate} achieved={achieved:.6f} n={corrupted.length}")
    return EXIT_OK


def _decode_indices(code, oracle: QueryOracle, sk: Optional[SecretKey], indices: Sequence[int], seed: int
                    ) -> List[Dict[str, Any]]:
    rows = []
    for i in indices:
        view = CountingView(oracle)
        rng = np.random.default_rng((seed, i))
        try:
            if isinstance(code, PrivateLDC):
                value = code.local_decode(view, i, sk)
            else:
                value = code.local_decode(view, i, sk, rng)
            rows.append({"index": i, "value": int(value), "queries": view.query_count, "failed": False})
        except DecodeFailure as e:
            logging.warning("Index %d did not decode: %s", i, e)
            rows.append({"index": i, "value": None, "queries": view.query_count, "failed": True})
    return rows


def _decode_all(code, oracle: QueryOracle, sk: Optional[SecretKey], k: int, seed: int) -> List[Dict[str, Any]]:
    """Every index, one block decode per block; each index reports its block's query count."""
    hamming = code if isinstance(code, PrivateLDC) else code.hamming
    m = hamming.params.m
    rows = []
    for j in range(hamming.params.blocks):
        view = CountingView(oracle)
        try:
            if isinstance(code, PrivateLDC):
                bits = code.decode_block(view, j, sk)
            else:
                bits = code.decode_block(view, j, sk, np.random.default_rng((seed, j)))
            failed = False
        except DecodeFailure as e:
            logging.warning("Block %d did not decode: %s", j, e)
            bits, failed = None, True
        for offset in range(m):
            i = j * m + offset
            if i >= k:
                break
            rows.append({"index": i, "value": None if failed else int(bits[offset]),
                         "queries": view.query_count, "failed": failed})
    return rows


def cmd_decode(args: argparse.Namespace) -> int:
    word, header, meta = read_container(args.input)
    if "config" not in meta:
        raise ContainerFormatError(f"{args.input} has no sidecar config; cannot rebuild its code")
    config = ExperimentConfig.from_dict(meta["config"])
    indices = parse_indices(args.index)
    config.indices = indices
    config.validate(MAX_GAME_ROUNDS)
    code = build_code(config)
    _check_header(code, header)

    sk = None
    if not isinstance(code, ResourceBoundedCode):
        key_path = args.key or meta.get("key_path")
        if not key_path or not os.path.exists(key_path):
            raise KeyMismatch("a keyed container needs --key")
        sk = read_key(key_path)
        if meta.get("key_fingerprint") and sk.fingerprint() != meta["key_fingerprint"]:
            raise KeyMismatch(f"key {sk.fingerprint()} is not the one the container was encoded with")

    oracle = QueryOracle(word)
    seed = args.seed if args.seed is not None else config.seed
    if indices is None:
        rows = _decode_all(code, oracle, sk, config.k, seed)
    else:
        rows = _decode_indices(code, oracle, sk, indices, seed)
    frame = pd.DataFrame(rows, columns=["index", "value", "queries", "failed"])
    print(frame.to_string(index=False))
    logging.info("Decoded %d index(es), max queries %d, locality cap %d", len(frame),
                 int(frame["queries"].max()) if len(frame) else 0, code.locality)

    if args.out:
        json_path, csv_path = output_paths(args.out)
        with output_lock(json_path):
            write_csv(frame, csv_path, config.to_dict())
            with open(json_path, "w", encoding="utf-8") as f:
                json.dump({"config": config.to_dict(), "build_stamp": build_stamp(), "seed": seed,
                           "locality": code.locality, "rows": rows}, f, indent=2)
    failures = int(frame["failed"].sum())
    DatabaseManager(args.db).record_run(new_run_id("decode"), "decode", config.codec, config.to_dict(), build_stamp(),
                                        {"indices": len(frame), "failures": failures})
    return EXIT_DECODE if failures else EXIT_OK


def cmd_game(args: argparse.Namespace) -> int:
    config = config_from_args(args).validate(MAX_GAME_ROUNDS)
    service = ExperimentService(config, max_workers=args.workers)
    reports = service.run_games(progress=args.progress)
    stamp = build_stamp()
    for report in reports:
        report.config = config.to_dict()
        report.build_stamp = stamp
    summary = service.summarize(reports)

    if config.out:
        json_path, csv_path = output_paths(config.out)
        frames = []
        for index, report in enumerate(reports):
            frame = report.summary_frame()
            frame.insert(0, "game", index)
            frames.append(frame)
        with output_lock(json_path):
            with open(json_path, "w", encoding="utf-8") as f:
                json.dump({"config": config.to_dict(), "build_stamp": stamp, "summary": summary,
                           "reports": [r.to_dict() for r in reports]}, f, indent=2)
            if frames:
                write_csv(pd.concat(frames, ignore_index=True), csv_path, config.to_dict())

    db = DatabaseManager(args.db)
    run_id = new_run_id("game")
    db.record_run(run_id, "game", config.codec, config.to_dict(), stamp, summary)
    for index, report in enumerate(reports):
        db.record_game(f"{run_id}/{index}", report)

    if "win_rate" in summary:
        print(f"games={summary['games']} wins={summary['wins']} win_rate={summary['win_rate']:.4f} "
              f"ci=[{summary['ci_low']:.4f}, {summary['ci_high']:.4f}] budget_aborts={summary['budget_aborts']}")
    else:
        print("games=0")
    if summary["games"] < config.games:
        logging.error("%d of %d games failed", config.games - summary["games"], config.games)
        return EXIT_USAGE
    return EXIT_BUDGET if summary["budget_aborts"] else EXIT_OK


def cmd_calibrate(args: argparse.Namespace) -> int:
    config = config_from_args(args)
    if not config.rates:
        config.rates = list(DEFAULT_RATES)
    config.validate(MAX_GAME_ROUNDS)
    code = build_code(config)
    if isinstance(code, PrivateLDC):
        raise ConfigValidationError(["codec: calibration needs a compiled codec"])
    rho = config.rho if config.rho is not None else code.hamming.params.rho
    service = CalibrationService(code.compiler, rho, max_workers=args.workers)
    sweep = service.sweep(config.channel, config.rates, config.trials, config.seed, config.confidence,
                          progress=args.progress)
    theta1 = None
    if args.theta1_trials and not isinstance(code, ResourceBoundedCode):
        theta1 = service.theta1(code, config.channel, service.rho_fin_from(sweep), args.theta1_trials,
                                config.seed, config.confidence)
    guarantee = service.guarantee(sweep, config.trials, config.seed, theta1)

    if config.out:
        json_path, csv_path = output_paths(config.out)
        with output_lock(json_path):
            write_csv(sweep, csv_path, config.to_dict())
            with open(json_path, "w", encoding="utf-8") as f:
                json.dump({"config": config.to_dict(), "build_stamp": build_stamp(), "rho": rho,
                           "guarantee": asdict(guarantee), "sweep": sweep.to_dict(orient="records")},
                          f, indent=2)
    db = DatabaseManager(args.db)
    run_id = new_run_id("calibrate")
    db.record_run(run_id, "calibrate", config.codec, config.to_dict(), build_stamp(), {"rho_fin": guarantee.rho_fin})
    db.record_calibration(run_id, sweep.to_dict(orient="records"))
    print(sweep.to_string(index=False))
    print(f"rho_fin={guarantee.rho_fin} theta2_hat={guarantee.theta2_hat} theta1_hat={guarantee.theta1_hat}")
    return EXIT_OK


def _code_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--codec", choices=CODECS, default=None, help="codec id (default priv-insdel-v1)")
    parser.add_argument("--lam", type=int, default=None, help=f"security parameter (default {DEFAULT_LAMBDA})")
    parser.add_argument("--k", type=int, default=None, help="message bits")
    parser.add_argument("--m", type=int, default=None, help="bits per Hamming block")
    parser.add_argument("--T", type=int, default=None, help="round hardness of the safe function")
    parser.add_argument("--b", type=int, default=None, help=f"compiler payload bits (default {DEFAULT_BLOCK_BITS})")
    parser.add_argument("--beta", type=int, default=None, help=f"compiler buffer length (default {DEFAULT_BUFFER})")
    parser.add_argument("--amp", type=int, default=None, help=f"recover repetitions (default {DEFAULT_AMP})")
    parser.add_argument("--seed", type=int, default=None, help=f"experiment seed (default {DEFAULT_SEED})")
    parser.add_argument("--db", default=DB_CONFIG, help="SQLite run ledger")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="idlc", description="Private and resource-bounded insdel LDC experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    encode = sub.add_parser("encode", help="encode a file into a compiled-word container")
    _code_flags(encode)
    encode.add_argument("--input", required=True, help="message file (raw bytes)")
    encode.add_argument("--key", default=None, help="key file (created if missing; default <out>.key)")
    encode.add_argument("--out", required=True, help="container path")

    corrupt = sub.add_parser("corrupt", help="run a container through a channel")
    corrupt.add_argument("--input", required=True)
    corrupt.add_argument("--channel", required=True, choices=channel_ids())
    corrupt.add_argument("--rate", type=float, required=True)
    corrupt.add_argument("--seed", type=int, default=DEFAULT_SEED)
    corrupt.add_argument("--out", required=True)
    corrupt.add_argument("--db", default=DB_CONFIG)

    decode = sub.add_parser("decode", help="locally decode indices of a container")
    decode.add_argument("--input", required=True)
    decode.add_argument("--key", default=None)
    decode.add_argument("--index", default="all", help='comma-separated indices or "all"')
    decode.add_argument("--seed", type=int, default=None)
    decode.add_argument("--out", default=None, help="JSON/CSV stem for the per-index table")
    decode.add_argument("--db", default=DB_CONFIG)

    game = sub.add_parser("game", help="play security games")
    _code_flags(game)
    game.add_argument("--config", default=None, help="ExperimentConfig JSON; flags override it")
    game.add_argument("--game", choices=GAMES, default=None)
    game.add_argument("--channel", default=None, help=f"one of {', '.join(channel_ids())}")
    game.add_argument("--rate", type=float, default=None, help="edit-distance channel rate")
    game.add_argument("--hamming-rate", dest="hamming_rate", type=float, default=None,
                      help="Hamming budget of key-aware adversaries")
    game.add_argument("--flips", type=int, default=None,
                      help="positions of the target block a key-aware attack flips (default: all of them)")
    game.add_argument("--adversary-cmd", dest="adversary_cmd", default=None,
                      help="command line of the subprocess adversary")
    game.add_argument("--rounds", type=int, default=None, help="adaptive rounds h")
    game.add_argument("--games", type=int, default=None, help="independent games to play")
    game.add_argument("--single-time", dest="single_time", action="store_true", help="reuse one key every round")
    game.add_argument("--trials", type=int, default=None, help=f"decoder trials (default {DEFAULT_TRIALS})")
    game.add_argument("--confidence", type=float, default=None, help=f"default {DEFAULT_CONFIDENCE}")
    game.add_argument("--p", type=float, default=None, help="success threshold of the fool predicate")
    game.add_argument("--rho", type=float, default=None, help="distance threshold of the fool predicate")
    game.add_argument("--budget-rounds", dest="budget_rounds", type=int, default=None,
                      help="parallel-round budget of the c_secure game")
    game.add_argument("--workers", type=int, default=default_workers())
    game.add_argument("--progress", action="store_true")
    game.add_argument("--out", default=None, help="JSON/CSV stem for the reports")

    calibrate = sub.add_parser("calibrate", help="sweep channel rates and measure the compiler guarantee")
    _code_flags(calibrate)
    calibrate.add_argument("--channel", default=None)
    calibrate.add_argument("--rates", default=None, help="comma-separated rates")
    calibrate.add_argument("--trials", type=int, default=None)
    calibrate.add_argument("--confidence", type=float, default=None)
    calibrate.add_argument("--rho", type=float, default=None, help="Hamming radius that counts as a transfer")
    calibrate.add_argument("--theta1-trials", dest="theta1_trials", type=int, default=0)
    calibrate.add_argument("--workers", type=int, default=default_workers())
    calibrate.add_argument("--progress", action="store_true")
    calibrate.add_argument("--out", default=None, help="JSON/CSV stem for the calibration report")
    return parser


COMMANDS = {
    "encode": cmd_encode,
    "corrupt": cmd_corrupt,
    "decode": cmd_decode,
    "game": cmd_game,
    "calibrate": cmd_calibrate,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigValidationError as e:
        logging.error("Invalid configuration: %s", "; ".join(e.problems))
        return EXIT_USAGE
    except BudgetExceeded as e:
        logging.error("Budget exceeded: %s", e)
        return EXIT_BUDGET
    except DecodeFailure as e:
        logging.error("Decode failure: %s", e)
        return EXIT_DECODE
    except (IdlcError, OSError) as e:
        logging.error("%s failed: %s", args.command, e)
        return EXIT_USAGE
