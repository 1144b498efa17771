"""Mapping of command outcomes to process exit statuses."""

from typing import Any, Callable

from chgsim.core.exceptions import ChgError
from chgsim.core.logger import logger

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_SOLVER = 3
EXIT_CONFIG = 4


def handle_command(func: Callable[..., int], *args: Any, **kwargs: Any) -> int:
    """
    Run a subcommand and turn its outcome into an exit status.

    ChgError subclasses carry their own status (2 validator, 3 solver,
    4 configuration); any other exception is logged with its traceback and
    mapped to 3.
    """
    try:
        status = func(*args, **kwargs)
        return EXIT_OK if status is None else int(status)
    except ChgError as exc:
        log = logger.warning if exc.exit_code == EXIT_VALIDATION else logger.error
        log(
            "Command failed",
            command=getattr(func, "__name__", str(func)),
            code=exc.code,
            message=str(exc),
            details=exc.details,
            exit_code=exc.exit_code,
        )
        return exc.exit_code
    except Exception as exc:
        logger.error(
            "Unhandled exception",
            command=getattr(func, "__name__", str(func)),
            exception=exc.__class__.__name__,
            message=str(exc),
            exc_info=True,
        )
        return EXIT_SOLVER
