"""Unit tests for logging setup."""

import logging

import structlog

from chgsim.core.logger import bind_run_context, setup_logger


class TestSetupLogger:
    """Test logger configuration."""

    def test_level_override(self):
        setup_logger(level="error")

        assert logging.getLogger().level == logging.ERROR

        setup_logger(level="WARNING", fmt="console")

    def test_run_context_replaces_previous(self):
        bind_run_context("check", "a.cfg", seed=3)
        bind_run_context("simulate", "b.cfg")

        context = structlog.contextvars.get_contextvars()
        structlog.contextvars.clear_contextvars()

        assert context == {"command": "simulate", "config": "b.cfg"}
