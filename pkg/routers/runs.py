from typing import List, Optional

from fastapi import APIRouter, Depends, HTTPException
from sqlalchemy.orm import Session

import schemas
from database import get_db
from models import RunRecord

router = APIRouter(prefix="/runs", tags=["runs"])


@router.get("", response_model=List[schemas.RunReportResponse])
def list_runs(command: Optional[str] = None, limit: int = 50, db: Session = Depends(get_db)):
    if not 1 <= limit <= 1000:
        raise HTTPException(status_code=422, detail="limit must be between 1 and 1000")
    query = db.query(RunRecord)
    if command:
        query = query.filter(RunRecord.command == command)
    return query.order_by(RunRecord.id.desc()).limit(limit).all()


@router.get("/{run_id}", response_model=schemas.RunReportResponse)
def get_run(run_id: int, db: Session = Depends(get_db)):
    run = db.query(RunRecord).filter(RunRecord.id == run_id).first()
    if not run:
        raise HTTPException(status_code=404, detail="Run not found")
    return run
