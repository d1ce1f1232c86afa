from contextlib import contextmanager

from sqlalchemy import create_engine
from sqlalchemy.orm import sessionmaker, DeclarativeBase
from .config import DATABASE_URL


def connect_args_for(url: str) -> dict:
    # sqlite connections are otherwise pinned to the thread that opened them
    if url.startswith("sqlite"):
        return {"check_same_thread": False}
    return {}


engine = create_engine(DATABASE_URL, connect_args=connect_args_for(DATABASE_URL), pool_pre_ping=True)

SessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=engine)

class Base(DeclarativeBase):
    pass

def init_db(bind=None):
    """Create the run history tables if they do not exist yet."""
    from . import models  # noqa: F401  (registers the tables on Base.metadata)
    Base.metadata.create_all(bind=bind or engine)

@contextmanager
def get_db():
    db = SessionLocal()
    try:
        init_db(db.get_bind())
        yield db
    finally:
        db.close()
