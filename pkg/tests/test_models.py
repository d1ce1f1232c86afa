"""
Tests for models.py database models.
"""
import pytest
from datetime import datetime

from kcopy.models import RunRecord


@pytest.mark.unit
class TestRunRecordModel:
    """Tests for the RunRecord model."""

    def test_run_creation(self, db_session):
        """Test creating a run in the database."""
        run = RunRecord(
            label="adv-500",
            algorithm="ph3:1/19",
            bins_used=580,
            opt_lb=334,
            ffd_ub=335,
            ratio_low="116/67",
            ratio_high="290/167",
            wall_time=0.25,
        )
        db_session.add(run)
        db_session.commit()
        db_session.refresh(run)

        assert run.id is not None
        assert run.algorithm == "ph3:1/19"
        assert run.bins_used == 580
        assert run.ratio_low == "116/67"
        assert isinstance(run.recorded_at, datetime)

    def test_nullable_ratios(self, db_session):
        """Test that empty-instance runs store NULL ratios."""
        run = RunRecord(label="empty", algorithm="nf", bins_used=0, opt_lb=0, ffd_ub=0)
        db_session.add(run)
        db_session.commit()
        db_session.refresh(run)
        assert run.ratio_low is None
        assert run.ratio_high is None
        assert run.wall_time is None

    def test_filter_by_algorithm(self, db_session):
        """Test querying runs by algorithm."""
        for algo in ("nf", "ff", "nf"):
            db_session.add(RunRecord(label="x", algorithm=algo, bins_used=1, opt_lb=1, ffd_ub=1))
        db_session.commit()
        assert db_session.query(RunRecord).filter(RunRecord.algorithm == "nf").count() == 2
