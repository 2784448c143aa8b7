"""Event logging: database ledger when enabled, rich console otherwise."""
import json
from datetime import datetime, timezone
from typing import Any, Dict

from rich.console import Console
from sqlalchemy.orm import Session

from cornerwaves.config.settings import get_settings


_console = Console(stderr=True, highlight=False)


def _echo(source: str, event_type: str, payload: Dict[str, Any] | None, style: str = "dim") -> None:
    payload_str = json.dumps(payload or {}, default=str)
    _console.print(f"[{style}]\\[{source}] {event_type}:[/{style}] {payload_str}", markup=True)


def log_event(
    source: str,
    event_type: str,
    payload: Dict[str, Any] | None = None,
    db: Session | None = None
) -> None:
    """
    Log an event to the run ledger (if enabled), otherwise echo it when verbose.

    Args:
        source: Module emitting the event (e.g., 'mesh', 'dno', 'evolution')
        event_type: Type of event (e.g., 'mesh_generated', 'schur_built')
        payload: Event payload (JSON serialized with str fallback)
        db: Optional database session (creates new if not provided)
    """
    try:
        settings = get_settings()
    except Exception:
        _echo(source, event_type, payload)
        return

    if not settings.enable_database:
        if settings.verbose:
            _echo(source, event_type, payload)
        return

    # Imported lazily so the numerical core never touches sqlalchemy unless asked.
    from cornerwaves.storage.db import get_db_sync
    from cornerwaves.storage.models import Event

    close_db = False
    if db is None:
        try:
            db = get_db_sync()
            close_db = True
        except Exception:
            _echo(source, event_type, payload)
            return

    try:
        event = Event(
            ts=datetime.now(timezone.utc),
            source=source,
            type=event_type,
            payload_json=json.dumps(payload or {}, default=str)
        )
        db.add(event)
        db.commit()
    except Exception:
        try:
            db.rollback()
        except Exception:
            pass
        _echo(source, f"{event_type} (DB failed)", payload)
    finally:
        if close_db and db:
            try:
                db.close()
            except Exception:
                pass


def log_error(source: str, error: Exception | str, context: Dict[str, Any] | None = None) -> None:
    """Log an error; errors are always echoed to stderr."""
    payload = {
        "error": str(error),
        "error_type": type(error).__name__ if isinstance(error, Exception) else "string"
    }
    if context:
        payload.update(context)

    # log_event already echoes in verbose console mode
    echoed = False
    try:
        settings = get_settings()
        echoed = settings.verbose and not settings.enable_database
    except Exception:
        pass
    if not echoed:
        _echo(source, "error", payload, style="red")
    log_event(source=source, event_type="error", payload=payload)
