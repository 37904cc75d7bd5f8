import os
import logging
from dotenv import load_dotenv
from filelock import FileLock

# Load environment variables from .env file
load_dotenv()

LOG_LEVEL: str = os.getenv("IDLC_LOG_LEVEL", "INFO").upper()

# Configure logging
logging.basicConfig(
    level=getattr(logging, LOG_LEVEL, logging.INFO),
    format="%(asctime)s [%(levelname)s] %(message)s",
    datefmt="%Y-%m-%d %H:%M:%S"
)

# Environment variables
THREADS: int = int(os.getenv("IDLC_THREADS", "4"))
DB_CONFIG: str = os.getenv("IDLC_DB", "./db/idlc_runs.sqlite3")
DEFAULT_LAMBDA: int = int(os.getenv("IDLC_LAMBDA", "64"))
DEFAULT_SEED: int = int(os.getenv("IDLC_SEED", "0"))
CHECK_CHANNELS: bool = os.getenv("IDLC_CHECK_CHANNELS", "0") == "1"

BASE_DIR = os.path.dirname(__file__)

# Code defaults. Constants marked "calibrated" come out of `idlc.py calibrate`.
DEFAULT_REPETITIONS = 15          # majority factor R of decode_all
DEFAULT_BLOCK_BITS = 16           # compiler payload bits per block (b)
DEFAULT_BUFFER = 12               # compiler buffer length (beta)
DEFAULT_DELTA_IN = 0.1            # inner code fractional insdel radius
DEFAULT_AMP = 3                   # recover repetitions
DEFAULT_PROBE_FACTOR = 4          # c_p in probe_cap = c_p * log2(#blocks)
DEFAULT_RHO_FIN = 0.001           # calibrated; held at K=1024 by the slow transfer test
DEFAULT_P = 0.99
DEFAULT_P_FIN = 0.9
DEFAULT_EPS = 0.001
DEFAULT_CONFIDENCE = 0.95
DEFAULT_TRIALS = 100
MAX_GAME_ROUNDS = 64


def default_workers() -> int:
    """Worker count for thread fan-out, capped by IDLC_THREADS."""
    return max(1, min(THREADS, os.cpu_count() or 1))


def output_lock(path: str, timeout: float = 5) -> FileLock:
    """
    Lock guarding an output path so two invocations never write the same file.
    """
    return FileLock(str(path) + ".lock", timeout=timeout)
