import json
import logging
import os
import sqlite3
from datetime import datetime
from typing import Any, Dict, Iterable, List, Optional

from config import DB_CONFIG
from models.reports import GameReport

SCHEMA = """
CREATE TABLE IF NOT EXISTS runs (
    run_id TEXT PRIMARY KEY,
    command TEXT NOT NULL,
    codec TEXT,
    config_json TEXT NOT NULL,
    build_stamp TEXT,
    created_at TEXT NOT NULL,
    summary_json TEXT
);
CREATE TABLE IF NOT EXISTS game_rounds (
    run_id TEXT NOT NULL,
    round INTEGER NOT NULL,
    distance REAL,
    worst_index INTEGER,
    lower REAL,
    upper REAL,
    verdict TEXT,
    PRIMARY KEY (run_id, round)
);
CREATE TABLE IF NOT EXISTS calibration_points (
    run_id TEXT NOT NULL,
    rate REAL NOT NULL,
    trials INTEGER,
    failures INTEGER,
    theta_hat REAL,
    ci_low REAL,
    ci_high REAL,
    PRIMARY KEY (run_id, rate)
);
"""


class DatabaseManager:
    """SQLite ledger of CLI runs. Write errors are logged, never raised."""

    def __init__(self, db_path: str = DB_CONFIG):
        self.db_path = db_path

    def get_connection(self) -> sqlite3.Connection:
        """Get a database connection, creating the file and schema on first use."""
        directory = os.path.dirname(self.db_path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        conn = sqlite3.connect(self.db_path)
        conn.executescript(SCHEMA)
        return conn

    def record_run(self, run_id: str, command: str, codec: Optional[str], config: Dict[str, Any],
                   build_stamp: str, summary: Optional[Dict[str, Any]] = None) -> bool:
        try:
            with self.get_connection() as conn:
                conn.execute("""
                    INSERT INTO runs (run_id, command, codec, config_json, build_stamp, created_at, summary_json)
                    VALUES (?, ?, ?, ?, ?, ?, ?)
                    ON CONFLICT(run_id) DO UPDATE SET
                        summary_json = COALESCE(excluded.summary_json, summary_json),
                        build_stamp = excluded.build_stamp
                """, (
                    run_id, command, codec, json.dumps(config), build_stamp,
                    datetime.now().isoformat(timespec="seconds"),
                    json.dumps(summary) if summary is not None else None,
                ))
                logging.info("Recorded run %s (%s)", run_id, command)
                return True
        except sqlite3.Error as e:
            logging.error("Database error recording run %s: %s", run_id, e)
            return False

    def record_game(self, run_id: str, report: GameReport) -> bool:
        try:
            with self.get_connection() as conn:
                conn.executemany("""
                    INSERT INTO game_rounds (run_id, round, distance, worst_index, lower, upper, verdict)
                    VALUES (?, ?, ?, ?, ?, ?, ?)
                    ON CONFLICT(run_id, round) DO UPDATE SET
                        distance = excluded.distance,
                        worst_index = excluded.worst_index,
                        lower = excluded.lower,
                        upper = excluded.upper,
                        verdict = excluded.verdict
                """, [
                    (run_id, r.round, r.verdict.distance, r.verdict.worst_index,
                     r.verdict.worst_success_lower, r.verdict.worst_success_upper, r.verdict.fooled)
                    for r in report.rounds
                ])
                return True
        except sqlite3.Error as e:
            logging.error("Database error recording rounds of %s: %s", run_id, e)
            return False

    def record_calibration(self, run_id: str, points: Iterable[Dict[str, Any]]) -> bool:
        try:
            with self.get_connection() as conn:
                conn.executemany("""
                    INSERT INTO calibration_points (run_id, rate, trials, failures, theta_hat, ci_low, ci_high)
                    VALUES (:run_id, :rate, :trials, :failures, :theta_hat, :ci_low, :ci_high)
                    ON CONFLICT(run_id, rate) DO UPDATE SET
                        trials = excluded.trials,
                        failures = excluded.failures,
                        theta_hat = excluded.theta_hat,
                        ci_low = excluded.ci_low,
                        ci_high = excluded.ci_high
                """, [dict(point, run_id=run_id) for point in points])
                return True
        except sqlite3.Error as e:
            logging.error("Database error recording calibration of %s: %s", run_id, e)
            return False

    def get_run(self, run_id: str) -> Optional[Dict[str, Any]]:
        try:
            with self.get_connection() as conn:
                conn.row_factory = sqlite3.Row
                row = conn.execute("SELECT * FROM runs WHERE run_id = ?", (run_id,)).fetchone()
                return dict(row) if row else None
        except sqlite3.Error as e:
            logging.error("Error fetching run %s: %s", run_id, e)
            return None

    def get_rounds(self, run_id: str) -> List[Dict[str, Any]]:
        try:
            with self.get_connection() as conn:
                conn.row_factory = sqlite3.Row
                rows = conn.execute("SELECT * FROM game_rounds WHERE run_id = ? ORDER BY round", (run_id,))
                return [dict(r) for r in rows.fetchall()]
        except sqlite3.Error as e:
            logging.error("Error fetching rounds of %s: %s", run_id, e)
            return []
