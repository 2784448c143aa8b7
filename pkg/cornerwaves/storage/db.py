"""Database initialization and session management."""
from sqlalchemy import create_engine
from sqlalchemy.engine import Engine
from sqlalchemy.orm import Session, sessionmaker

from cornerwaves.config.settings import get_settings
from cornerwaves.storage.models import Base


_engine: Engine | None = None
_session_factory: sessionmaker | None = None


def get_engine() -> Engine:
    """Create the SQLite engine on first use, pointed at settings.db_file."""
    global _engine, _session_factory
    if _engine is None:
        _engine = create_engine(f"sqlite:///{get_settings().db_file}", echo=False)
        _session_factory = sessionmaker(autocommit=False, autoflush=False, bind=_engine)
    return _engine


def init_db() -> None:
    """Initialize database tables. May raise exceptions on failure."""
    Base.metadata.create_all(bind=get_engine())


def get_db_sync() -> Session:
    """Get a database session (synchronous, callers must close)."""
    get_engine()
    return _session_factory()


def dispose_engine() -> None:
    """Close pooled connections and forget the engine (db_file may change)."""
    global _engine, _session_factory
    if _engine is not None:
        _engine.dispose()
    _engine = None
    _session_factory = None
