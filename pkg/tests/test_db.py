"""
Tests for db.py database configuration.
"""
import pytest
from sqlalchemy import inspect
from sqlalchemy.orm import Session

import kcopy.db
from kcopy.db import Base, SessionLocal, connect_args_for, engine, get_db, init_db


@pytest.mark.unit
class TestDatabaseConfiguration:
    """Tests for database configuration."""

    def test_engine_is_sqlite(self):
        """Test that the test environment uses SQLite."""
        assert engine is not None
        assert engine.dialect.name == "sqlite"
        assert SessionLocal.kw["bind"] is engine

    def test_connect_args_per_backend(self):
        """Test that only SQLite URLs get check_same_thread disabled."""
        assert connect_args_for("sqlite:///./runs.db") == {"check_same_thread": False}
        assert connect_args_for("postgresql://kcopy@localhost/runs") == {}

    def test_init_db_creates_runs_table(self, db_engine):
        """Test that init_db registers and creates the runs table."""
        Base.metadata.drop_all(bind=db_engine)
        init_db(db_engine)
        assert "runs" in inspect(db_engine).get_table_names()

    def test_get_db_yields_and_closes(self, cli_db):
        """Test that get_db yields a session with the tables in place."""
        with get_db() as db:
            assert isinstance(db, Session)
            assert "runs" in inspect(db.get_bind()).get_table_names()

    def test_get_db_closes_on_error(self, monkeypatch, cli_db):
        """Test that the session is closed when the block raises."""
        closed = []
        factory = kcopy.db.SessionLocal

        def tracking_factory():
            session = factory()
            original = session.close
            session.close = lambda: (closed.append(True), original())
            return session

        monkeypatch.setattr(kcopy.db, "SessionLocal", tracking_factory)
        with pytest.raises(ValueError):
            with get_db():
                raise ValueError("boom")
        assert closed == [True]
