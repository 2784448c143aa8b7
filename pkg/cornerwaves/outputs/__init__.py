"""CSV and JSON writers, console rendering."""
