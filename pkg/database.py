import os
from typing import Optional

from dotenv import load_dotenv
from sqlalchemy import create_engine
from sqlalchemy.orm import sessionmaker

from logger import get_logger
from models import Base, RunRecord
from schemas import RunReport

load_dotenv()

RUNS_DATABASE_URL = os.getenv("RUNS_DATABASE_URL", "sqlite:///./runs.db")

if RUNS_DATABASE_URL.startswith("sqlite"):
    engine = create_engine(
        RUNS_DATABASE_URL,
        connect_args={"check_same_thread": False}
    )
else:
    engine = create_engine(RUNS_DATABASE_URL)

SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=engine)

logger = get_logger()


def init_db():
    Base.metadata.create_all(bind=engine)


def get_db():
    db = SessionLocal()
    try:
        yield db
    finally:
        db.close()


def record_run(report: RunReport, ok: bool = True, error: Optional[str] = None) -> int:
    init_db()
    db = SessionLocal()
    try:
        row = RunRecord(
            command=report.command,
            ok=ok,
            error=error[:500] if error else None,
            **report.model_dump(exclude={"command"}),
        )
        db.add(row)
        db.commit()
        run_id = row.id
    finally:
        db.close()
    logger.log_run(report.command, ok, report.model_dump(), error)
    return run_id
