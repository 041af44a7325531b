from sqlalchemy import Boolean, Column, DateTime, Float, Integer, JSON, String
from sqlalchemy.orm import declarative_base
from sqlalchemy.sql import func

Base = declarative_base()


class RunRecord(Base):
    __tablename__ = "runs"

    id = Column(Integer, primary_key=True, index=True)
    command = Column(String(32), index=True, nullable=False)
    ok = Column(Boolean, default=True, nullable=False)
    params = Column(JSON, nullable=False, default=dict)
    iterations = Column(Integer, default=0, nullable=False)
    final_gap = Column(Float, nullable=True)
    objective = Column(Float, nullable=True)
    mass_in = Column(Float, nullable=True)
    mass_out = Column(Float, nullable=True)
    wall_time_ms = Column(Float, default=0.0, nullable=False)
    outputs = Column(JSON, nullable=False, default=list)
    error = Column(String(500), nullable=True)
    created_at = Column(DateTime(timezone=True), server_default=func.now())
