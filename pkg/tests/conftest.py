"""
Pytest configuration and shared fixtures.
"""
import os
from fractions import Fraction

import pytest
from sqlalchemy import create_engine
from sqlalchemy.orm import sessionmaker
from sqlalchemy.pool import StaticPool

# Set test environment variables before importing kcopy modules
os.environ["DATABASE_URL"] = "sqlite:///:memory:"
os.environ.setdefault("LOG_LEVEL", "INFO")

import kcopy.db
from kcopy.db import Base
from kcopy.domain import Instance
from kcopy.models import RunRecord  # noqa: F401  (registers the runs table)


@pytest.fixture(scope="function")
def db_engine():
    """In-memory SQLite engine shared by every connection of one test."""
    engine = create_engine(
        "sqlite:///:memory:",
        connect_args={"check_same_thread": False},
        poolclass=StaticPool,
    )
    Base.metadata.create_all(bind=engine)
    yield engine
    Base.metadata.drop_all(bind=engine)


@pytest.fixture(scope="function")
def db_session(db_engine):
    """Create a fresh database session for each test."""
    TestingSessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=db_engine)
    session = TestingSessionLocal()
    try:
        yield session
    finally:
        session.close()


@pytest.fixture(scope="function")
def cli_db(monkeypatch, db_engine):
    """Point the CLI's session factory at the test engine."""
    TestingSessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=db_engine)
    monkeypatch.setattr(kcopy.db, "SessionLocal", TestingSessionLocal)
    return TestingSessionLocal


@pytest.fixture
def write_instance(tmp_path):
    """Write sizes to an instance file and return its path."""
    def _write(sizes, name="inst.txt", header=None):
        path = tmp_path / name
        lines = [] if header is None else [f"# {header}"]
        lines.extend(str(s) for s in sizes)
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path
    return _write


@pytest.fixture
def mixed_instance():
    """Arrival order S S S L M M XL L."""
    return Instance.from_sizes(
        ["1/10", "1/10", "1/10", "3/5", "2/5", "2/5", "7/10", "3/5"],
        label="mixed",
    )


@pytest.fixture
def ffd_suboptimal():
    """FFD uses 3 bins, OPT packs {1/2, 3/10, 1/5} and {2/5, 3/10, 3/10} into 2."""
    return Instance.from_sizes(
        [Fraction(1, 2), Fraction(2, 5), Fraction(3, 10), Fraction(3, 10), Fraction(3, 10), Fraction(1, 5)],
        label="ffd-gap",
    )
