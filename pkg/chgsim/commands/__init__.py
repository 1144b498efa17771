"""CLI subcommands, one module per command."""

from chgsim.commands.check import cmd_check
from chgsim.commands.extend import cmd_extend
from chgsim.commands.simulate import cmd_simulate
from chgsim.commands.sweep import cmd_sweep
from chgsim.commands.symbol_scan import cmd_symbol_scan

COMMANDS = {
    "simulate": cmd_simulate,
    "check": cmd_check,
    "symbol-scan": cmd_symbol_scan,
    "extend": cmd_extend,
    "sweep": cmd_sweep,
}

__all__ = ["COMMANDS", "cmd_check", "cmd_extend", "cmd_simulate", "cmd_sweep", "cmd_symbol_scan"]
