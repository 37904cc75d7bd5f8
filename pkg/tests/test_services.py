import numpy as np
import pandas as pd
import pytest

from channels.adversaries import SubprocessAdversary
from codes.private_ldc import PrivateLDC
from compiler.insdel_compiler import make_compiler_params
from composed.private_insdel import PrivateInsdelCode
from composed.resource_bounded import ResourceBoundedCode
from config import DEFAULT_RHO_FIN
from models.errors import ConfigValidationError
from models.reports import NO, YES, ExperimentConfig, FoolVerdict, GameReport, RoundRecord, read_csv_config
from services.calibration_service import CalibrationService, closure_overhead, transfer_trial
from services.experiment_service import ExperimentService, build_adversary, build_code, default_rho, run_game_task

SMALL = dict(lam=16, k=128, m=16)


def game_config(**overrides):
    values = dict(command="game", codec="priv-hamming-v1", game="one_time", channel="key_aware_block",
                  hamming_rate=0.02, flips=7, games=2, **SMALL)
    values.update(overrides)
    return ExperimentConfig(**values).validate()


@pytest.mark.parametrize("codec, cls", [
    ("priv-hamming-v1", PrivateLDC),
    ("priv-insdel-v1", PrivateInsdelCode),
    ("rb-insdel-v1", ResourceBoundedCode),
])
def test_build_code(codec, cls):
    code = build_code(game_config(codec=codec, k=32, T=1))
    assert isinstance(code, cls)
    assert code.k == 32


def test_rb_codes_of_one_seed_share_an_oracle():
    config = game_config(codec="rb-insdel-v1", k=32, T=1)
    first, second = build_code(config), build_code(config)
    assert first.key_from_seed(b"\x01\x02") == second.key_from_seed(b"\x01\x02")


def test_default_rho():
    config = game_config()
    code = build_code(config)
    assert default_rho(code, config) == code.params.rho
    assert default_rho(build_code(game_config(codec="priv-insdel-v1", k=32)), game_config()) == DEFAULT_RHO_FIN
    assert default_rho(code, game_config(rho=0.01)) == 0.01


def test_build_adversary_passes_hamming_rate_to_keyed_attacks():
    adversary = build_adversary(game_config())
    assert adversary.hamming_rate == 0.02
    assert adversary.flips == 7
    assert build_adversary(game_config(flips=None)).flips is None
    assert build_adversary(game_config(channel="random_flip")).name == "random_flip"


def test_build_adversary_runs_external_commands():
    adversary = build_adversary(game_config(channel="subprocess", adversary_cmd=["cat"]))
    assert isinstance(adversary, SubprocessAdversary)
    assert adversary.command == ["cat"]
    with pytest.raises(ConfigValidationError):
        game_config(channel="subprocess")
    with pytest.raises(ConfigValidationError):
        game_config(flips=0)


def test_run_game_task_reports_failures():
    result = run_game_task(game_config(channel="no_such_channel"), 0)
    assert not result["success"]
    assert "no_such_channel" in result["error"]


def test_experiment_service_runs_and_summarizes():
    service = ExperimentService(game_config(), max_workers=2)
    reports = service.run_games()
    assert [r.seed for r in reports] == [0, 1]
    assert all(r.win for r in reports)
    assert all(r.rounds[0].verdict.fooled == YES for r in reports)
    summary = service.summarize(reports)
    assert summary["games"] == 2 and summary["wins"] == 2
    assert summary["win_rate"] == 1.0
    assert summary["budget_aborts"] == 0


def test_budget_aborts_are_counted():
    config = game_config(codec="rb-insdel-v1", k=32, T=2, game="c_secure", channel="safe_function",
                         hamming_rate=0.05, budget_rounds=2, rho=0.1, games=1)
    service = ExperimentService(config, max_workers=1)
    reports = service.run_games()
    assert reports[0].rounds[0].verdict.aborted == "budget_exceeded:rounds"
    assert "safe_function_delta_per_query" in reports[0].extras
    assert service.summarize(reports)["budget_aborts"] == 1


def test_transfer_is_exact_without_corruption():
    params = make_compiler_params(128)
    row = transfer_trial(params, "random_insdel", 0.0, 0.01, seed=1, trial=0)
    assert row == {"trial": 0, "hamming": 0.0, "failed": False}


def test_sweep_at_rate_zero():
    service = CalibrationService(make_compiler_params(128), rho=0.01, max_workers=2)
    sweep = service.sweep("random_insdel", [0.0], trials=4, seed=0)
    assert list(sweep.columns) == ["rate", "trials", "failures", "theta_hat", "ci_low", "ci_high"]
    assert sweep.loc[0, "failures"] == 0
    assert sweep.loc[0, "ci_low"] == 0.0
    guarantee = service.guarantee(sweep, trials=4, seed=0)
    assert guarantee.rho_fin == 0.0
    assert guarantee.theta2_hat == 0.0


def test_rho_fin_stops_at_first_bad_rate():
    sweep = pd.DataFrame({"rate": [0.004, 0.0, 0.002, 0.008], "theta_hat": [0.5, 0.0, 0.005, 0.0]})
    assert CalibrationService.rho_fin_from(sweep) == 0.002
    assert CalibrationService.rho_fin_from(sweep, target=0.6) == 0.008
    assert CalibrationService.rho_fin_from(pd.DataFrame({"rate": [0.001], "theta_hat": [0.2]})) == 0.0


def test_theta1_is_zero_on_clean_words():
    code = PrivateInsdelCode(32, 16, m=16)
    service = CalibrationService(code.compiler, rho=0.01, max_workers=1)
    result = service.theta1(code, "identity", 0.0, trials=3, seed=0)
    assert result["theta1_hat"] == 0.0


def test_closure_overhead_fit():
    result = closure_overhead([128, 256], rate=0.0)
    points = result["points"]
    assert list(points["K"]) == [128, 256]
    assert (points["rounds"] > 0).all()
    assert result["c4"] == pytest.approx(float(points["c4"].max()))
    assert np.isfinite(result["exponent"]) and result["c_fit"] > 0


@pytest.mark.slow
@pytest.mark.parametrize("channel", ["random_insdel", "zero_run_killer"])
def test_default_rho_fin_transfers_at_1024(channel):
    rho = PrivateLDC(1024, 64).params.rho
    service = CalibrationService(make_compiler_params(1024), rho=rho, max_workers=2)
    point = service.transfer_point(channel, DEFAULT_RHO_FIN, trials=200, seed=3)
    assert point["trials"] == 200
    assert point["theta_hat"] <= 0.01


@pytest.mark.slow
def test_closure_fit_is_stable_across_lengths():
    result = closure_overhead([1 << 10, 1 << 12, 1 << 14], rate=0.0)
    points = result["points"]
    fitted = result["c_fit"] * np.log2(points["n"]) ** result["exponent"]
    assert np.all(np.abs(points["rounds"] - fitted) <= 0.2 * fitted)
    assert result["exponent"] <= 4


def test_report_csv_starts_with_its_config(tmp_path):
    verdict = FoolVerdict(0.0, True, 3, 0.95, 1.0, NO, 100)
    report = GameReport("priv_ldc", "priv-hamming-v1", [RoundRecord(0, "01", "0110", "0110", verdict, [1, 1])],
                        win=False, seed=1, config={"codec": "priv-hamming-v1", "rounds": 1, "rates": [0.0]})
    report.write(str(tmp_path / "r.json"), str(tmp_path / "r.csv"))
    assert read_csv_config(str(tmp_path / "r.csv")) == report.config
    frame = pd.read_csv(tmp_path / "r.csv", comment="#")
    assert frame["verdict"].tolist() == [NO]
    assert frame["worst_index"].tolist() == [3]
    (tmp_path / "bare.csv").write_text("a,b\n1,2\n")
    with pytest.raises(ConfigValidationError):
        read_csv_config(str(tmp_path / "bare.csv"))
