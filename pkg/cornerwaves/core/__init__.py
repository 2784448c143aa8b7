"""Error types, event logging and the thread-pool helper."""
