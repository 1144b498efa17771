"""Error handling middleware."""
