"""Optional SQLite run ledger."""
