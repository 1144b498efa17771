"""Background workers for concurrent runs."""
