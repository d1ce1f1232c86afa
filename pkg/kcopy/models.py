from sqlalchemy import String, Float, DateTime, Integer
from sqlalchemy.orm import Mapped, mapped_column
from datetime import datetime, timezone
from typing import Optional
from .db import Base

class RunRecord(Base):
    __tablename__ = "runs"

    id: Mapped[int] = mapped_column(Integer, primary_key=True, index=True)
    label: Mapped[str] = mapped_column(String(256), index=True, default="")
    algorithm: Mapped[str] = mapped_column(String(64), index=True)

    bins_used: Mapped[int] = mapped_column(Integer)
    opt_lb: Mapped[int] = mapped_column(Integer)
    ffd_ub: Mapped[int] = mapped_column(Integer)

    # exact "p/q"; NULL for empty instances
    ratio_low: Mapped[Optional[str]] = mapped_column(String(64), nullable=True)
    ratio_high: Mapped[Optional[str]] = mapped_column(String(64), nullable=True)
    wall_time: Mapped[Optional[float]] = mapped_column(Float, nullable=True)

    recorded_at: Mapped[datetime] = mapped_column(
        DateTime(timezone=True),
        default=lambda: datetime.now(timezone.utc),
        index=True
    )
