import os
import json
import logging
from logging.handlers import TimedRotatingFileHandler
from datetime import datetime
from pathlib import Path
from typing import Optional
from dotenv import load_dotenv

load_dotenv()

LOGS_DIR = Path(os.getenv("LOGS_DIR", "logs"))
LOG_ROTATION_HOURS = int(os.getenv("LOG_ROTATION_HOURS", "24"))
LOG_BACKUP_COUNT = int(os.getenv("LOG_BACKUP_COUNT", "30"))
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO").upper()

LOGS_DIR.mkdir(parents=True, exist_ok=True)


class KrtvLogger:
    _instance: Optional['KrtvLogger'] = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
            cls._instance._initialized = False
        return cls._instance

    def __init__(self):
        if self._initialized:
            return
        self._initialized = True

        self.app_logger = self._create_logger("krtv_app", "app.log")
        self.solver_logger = self._create_logger("krtv_solver", "solver.log")
        self.io_logger = self._create_logger("krtv_io", "io.log")
        self.api_logger = self._create_logger("krtv_api", "api.log")
        self.runs_logger = self._create_logger("krtv_runs", "runs.log")

    def _create_logger(self, name: str, filename: str) -> logging.Logger:
        logger = logging.getLogger(name)
        logger.setLevel(getattr(logging, LOG_LEVEL, logging.INFO))
        logger.propagate = False

        for handler in logger.handlers[:]:
            logger.removeHandler(handler)

        handler = TimedRotatingFileHandler(
            LOGS_DIR / filename,
            when='H',
            interval=LOG_ROTATION_HOURS,
            backupCount=LOG_BACKUP_COUNT,
            encoding='utf-8'
        )
        handler.suffix = "%Y-%m-%d_%H-%M"
        handler.setLevel(getattr(logging, LOG_LEVEL, logging.INFO))

        formatter = logging.Formatter(
            '%(asctime)s | %(levelname)-8s | %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S'
        )
        handler.setFormatter(formatter)
        logger.addHandler(handler)

        console_handler = logging.StreamHandler()
        console_handler.setLevel(logging.WARNING)
        console_handler.setFormatter(formatter)
        logger.addHandler(console_handler)

        return logger

    def _format_log(self, data: dict) -> str:
        return json.dumps(data, default=str, ensure_ascii=False)

    def log_app_event(self, event: str, details: dict = None):
        entry = {
            "event": event,
            "timestamp": datetime.now().isoformat(),
            "details": details or {}
        }
        self.app_logger.info(self._format_log(entry))

    def log_solver_start(self, label: str, dims: tuple, tau: float, sigma: float, alpha: float, max_iters: int):
        entry = {
            "type": "SOLVER_START",
            "label": label,
            "dims": list(dims),
            "tau": tau,
            "sigma": sigma,
            "alpha": alpha,
            "max_iters": max_iters,
            "timestamp": datetime.now().isoformat()
        }
        self.solver_logger.info(self._format_log(entry))

    def log_solver_checkpoint(self, label: str, iteration: int, primal: float, dual: float, gap: float):
        if not self.solver_logger.isEnabledFor(logging.DEBUG):
            return
        entry = {
            "type": "SOLVER_CHECKPOINT",
            "label": label,
            "iteration": iteration,
            "primal": primal,
            "dual": dual,
            "gap": gap,
            "timestamp": datetime.now().isoformat()
        }
        self.solver_logger.debug(self._format_log(entry))

    def log_solver_finish(self, label: str, iterations: int, converged: bool, gap: float = None, duration_ms: float = None):
        entry = {
            "type": "SOLVER_FINISH",
            "label": label,
            "iterations": iterations,
            "converged": converged,
            "gap": gap,
            "duration_ms": duration_ms,
            "timestamp": datetime.now().isoformat()
        }
        if converged:
            self.solver_logger.info(self._format_log(entry))
        else:
            self.solver_logger.warning(self._format_log(entry))

    def log_solver_error(self, label: str, iteration: int, error: str, block: str = None):
        entry = {
            "type": "SOLVER_ERROR",
            "label": label,
            "iteration": iteration,
            "block": block,
            "error": str(error),
            "timestamp": datetime.now().isoformat()
        }
        self.solver_logger.error(self._format_log(entry))

    def log_io_event(self, operation: str, path: str, success: bool = True, shape: tuple = None, error: str = None):
        entry = {
            "type": f"IO_{operation.upper()}",
            "path": str(path),
            "success": success,
            "shape": list(shape) if shape is not None else None,
            "error": error,
            "timestamp": datetime.now().isoformat()
        }
        if success:
            self.io_logger.info(self._format_log(entry))
        else:
            self.io_logger.error(self._format_log(entry))

    def log_api_request(
        self,
        method: str,
        path: str,
        status_code: int,
        duration_ms: float = None,
        client_ip: str = None
    ):
        entry = {
            "type": "API_REQUEST",
            "method": method,
            "path": path,
            "status_code": status_code,
            "duration_ms": duration_ms,
            "client_ip": client_ip,
            "timestamp": datetime.now().isoformat()
        }
        level = logging.INFO if status_code < 400 else logging.WARNING if status_code < 500 else logging.ERROR
        self.api_logger.log(level, self._format_log(entry))

    def log_run(self, command: str, success: bool, report: dict = None, error: str = None):
        entry = {
            "type": "RUN",
            "command": command,
            "success": success,
            "report": report,
            "error": error,
            "timestamp": datetime.now().isoformat()
        }
        if success:
            self.runs_logger.info(self._format_log(entry))
        else:
            self.runs_logger.error(self._format_log(entry))


krtv_logger = KrtvLogger()


def get_logger() -> KrtvLogger:
    return krtv_logger
