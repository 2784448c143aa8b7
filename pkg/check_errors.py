"""Show recent errors and failed checks from the run ledger."""
import json
import sys

from sqlalchemy import desc

from cornerwaves.config.settings import get_settings
from cornerwaves.storage.db import get_db_sync
from cornerwaves.storage.models import CheckResult, Event, Run

limit = int(sys.argv[1]) if len(sys.argv) > 1 else 5

if not get_settings().enable_database:
    print("[!] Run ledger is disabled (set CORNER_WAVES_ENABLE_DATABASE=true)")
    sys.exit(1)

db = get_db_sync()
try:
    errors = db.query(Event).filter(Event.type == "error").order_by(desc(Event.ts)).limit(limit).all()

    print(f"Found {len(errors)} recent errors:")
    print("=" * 60)

    for i, error in enumerate(errors, 1):
        print(f"\nError {i} from {error.source} (at {error.ts}):")
        try:
            payload = json.loads(error.payload_json)
            print(f"  Error type: {payload.get('error_type', 'unknown')}")
            print(f"  Error message: {payload.get('error', 'unknown')}")
            if 'command' in payload:
                print(f"  Command: {payload['command']}")
            if 'action' in payload:
                print(f"  Action: {payload['action']}")
        except Exception as e:
            print(f"  Could not parse payload: {e}")
            print(f"  Raw payload: {error.payload_json[:500]}")
        print("-" * 60)

    failed = (db.query(CheckResult, Run)
              .join(Run, CheckResult.run_id == Run.id)
              .filter(CheckResult.passed.is_(False))
              .order_by(desc(Run.started_at))
              .limit(limit).all())

    print(f"\nFound {len(failed)} recent failed checks:")
    for check, run in failed:
        print(f"  run {run.id} (seed {run.seed}): {check.name} value={check.value} bound={check.bound}")
finally:
    db.close()
