import json
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Dict, List, Optional

import pandas as pd

from models.errors import ConfigValidationError

YES, NO, INCONCLUSIVE = "yes", "no", "inconclusive"


@dataclass
class FoolVerdict:
    distance: float
    distance_ok: bool
    worst_index: int
    worst_success_lower: float
    worst_success_upper: float
    fooled: str
    trials: int = 0
    aborted: Optional[str] = None


@dataclass
class RoundRecord:
    round: int
    x: str
    y: str
    y_corrupted: str
    verdict: FoolVerdict
    seed: List[int] = field(default_factory=list)


@dataclass
class GameReport:
    game: str
    codec: str
    rounds: List[RoundRecord]
    win: bool
    seed: int
    multi_time: bool = True
    meters: Dict[str, int] = field(default_factory=dict)
    extras: Dict[str, Any] = field(default_factory=dict)
    config: Dict[str, Any] = field(default_factory=dict)
    build_stamp: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def summary_frame(self) -> pd.DataFrame:
        rows = [{
            "round": r.round,
            "distance": r.verdict.distance,
            "worst_index": r.verdict.worst_index,
            "lower": r.verdict.worst_success_lower,
            "upper": r.verdict.worst_success_upper,
            "verdict": r.verdict.fooled,
        } for r in self.rounds]
        return pd.DataFrame(rows, columns=["round", "distance", "worst_index", "lower", "upper", "verdict"])

    def write(self, json_path: str, csv_path: Optional[str] = None) -> None:
        with open(json_path, "w", encoding="utf-8") as f:
            f.write(self.to_json())
        if csv_path:
            write_csv(self.summary_frame(), csv_path, self.config)


CONFIG_PREFIX = "# config: "


def write_csv(frame: pd.DataFrame, path: str, config: Dict[str, Any]) -> None:
    """CSV with the run config as a leading comment line; pandas reads it back with comment="#"."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(CONFIG_PREFIX + json.dumps(config, sort_keys=True) + "\n")
        frame.to_csv(f, index=False)


def read_csv_config(path: str) -> Dict[str, Any]:
    with open(path, encoding="utf-8") as f:
        line = f.readline()
    if not line.startswith(CONFIG_PREFIX):
        raise ConfigValidationError([f"{path}: no config line"])
    return json.loads(line[len(CONFIG_PREFIX):])


GAMES = ("one_time", "priv_ldc", "c_secure")
CODECS = ("priv-hamming-v1", "priv-insdel-v1", "rb-insdel-v1")


@dataclass
class ExperimentConfig:
    """Everything that determines a CLI run. Serialized next to every output."""
    command: str
    codec: str = "priv-insdel-v1"
    lam: int = 64
    k: int = 1024
    m: Optional[int] = None
    T: int = 8
    channel: str = "random_insdel"
    rate: float = 0.0
    hamming_rate: Optional[float] = None
    flips: Optional[int] = None
    adversary_cmd: Optional[List[str]] = None
    game: str = "priv_ldc"
    rounds: int = 1
    games: int = 1
    multi_time: bool = True
    trials: int = 100
    confidence: float = 0.95
    p: float = 0.9
    rho: Optional[float] = None
    seed: int = 0
    rates: List[float] = field(default_factory=list)
    b: int = 16
    beta: int = 12
    amp: int = 3
    budget_rounds: Optional[int] = None
    key: Optional[str] = None
    input: Optional[str] = None
    out: Optional[str] = None
    indices: Optional[List[int]] = None

    def validate(self, max_rounds: int = 64) -> "ExperimentConfig":
        problems = []
        if self.codec not in CODECS:
            problems.append(f"codec: unknown {self.codec!r}")
        if self.game not in GAMES:
            problems.append(f"game: unknown {self.game!r}")
        if self.k < 1:
            problems.append("k: must be positive")
        if self.lam < 16:
            problems.append("lam: must be at least 16")
        if not 0 <= self.rate <= 1:
            problems.append("rate: must lie in [0, 1]")
        if self.hamming_rate is not None and not 0 <= self.hamming_rate <= 1:
            problems.append("hamming_rate: must lie in [0, 1]")
        if self.flips is not None and self.flips < 1:
            problems.append("flips: must be positive")
        if self.channel == "subprocess" and not self.adversary_cmd:
            problems.append("adversary_cmd: the subprocess channel needs a command")
        if not 1 <= self.rounds <= max_rounds:
            problems.append(f"rounds: must lie in [1, {max_rounds}]")
        if self.games < 1:
            problems.append("games: must be positive")
        if self.trials < 1:
            problems.append("trials: must be positive")
        if not 0 < self.confidence < 1:
            problems.append("confidence: must lie in (0, 1)")
        if not 0.5 < self.p <= 1:
            problems.append("p: must lie in (1/2, 1]")
        if self.rho is not None and not 0 <= self.rho < 0.5:
            problems.append("rho: must lie in [0, 1/2)")
        if any(not 0 <= r <= 1 for r in self.rates):
            problems.append("rates: every rate must lie in [0, 1]")
        if self.T < 0:
            problems.append("T: must be non-negative")
        if self.indices is not None and any(i < 0 or i >= self.k for i in self.indices):
            problems.append(f"indices: must lie in [0, {self.k})")
        if problems:
            raise ConfigValidationError(problems)
        return self

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigValidationError([f"{name}: unknown field" for name in unknown])
        return cls(**data)
