from experiments.cli import build_parser, main
from experiments.commands import COMMANDS, CommandResult, run_command
from experiments.views import ExperimentConfig, load_config

__all__ = ["build_parser", "main", "COMMANDS", "CommandResult", "run_command", "ExperimentConfig", "load_config"]
