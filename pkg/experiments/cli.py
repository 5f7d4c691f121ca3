import argparse
import logging
import os
from dataclasses import asdict
from pathlib import Path

from dotenv import load_dotenv

from experiments.commands import CommandResult, run_command
from experiments.views import ExperimentConfig, load_config
from utils.errors import ConfigurationError, NumericalError, OracleCheckFailed
from utils.logging_config import setup_logging
from utils.utils import log_error, log_json_block, log_step, render_records, save_json_log

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERICAL = 2
EXIT_ORACLE = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="acms-helmholtz",
        description="ACMS experiments for the heterogeneous Helmholtz equation with impedance boundary",
    )
    parser.add_argument("--config", required=True, type=Path, help="JSON experiment config")
    parser.add_argument("--out", type=Path, default=None, help="output directory (default: the config's output.directory)")
    parser.add_argument("--threads", type=int, default=None, help="worker threads for per-subdomain stages")
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    return parser


def resolve_threads(value: int | None) -> int:
    if value is None:
        raw = os.getenv("ACMS_THREADS", "1")
        try:
            value = int(raw)
        except ValueError as e:
            raise ConfigurationError(f"ACMS_THREADS must be an integer, got '{raw}'") from e
    if value < 1:
        raise ConfigurationError(f"thread count must be positive, got {value}")
    return value


def report(config: ExperimentConfig, result: CommandResult, out_dir: Path) -> None:
    render_records([asdict(record) for record in result.records], f"{config.command}: {config.name}")
    for name, rows in result.summaries.items():
        render_records(rows, name)
    for path in result.files:
        log_step(f"wrote {path}", symbol="📄")
    save_json_log(
        {
            "config": config.model_dump(mode="json"),
            "summaries": result.summaries,
            "files": [str(path) for path in result.files],
            "failures": result.failures,
        },
        out_dir / "run.json",
    )


def main(argv: list[str] | None = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    setup_logging(args.verbose)
    try:
        config = load_config(args.config)
        threads = resolve_threads(args.threads)
        out_dir = args.out if args.out is not None else Path(config.output.directory)
        log_step(f"{config.command}: {config.name} ({threads} thread(s))", symbol="▶️")
        log_json_block("Experiment", config.model_dump(mode="json", exclude_none=True))

        result = run_command(config, out_dir, threads)
        report(config, result, out_dir)
        if result.failures:
            raise OracleCheckFailed(f"{len(result.failures)} oracle check(s) failed", result.failures)
    except OracleCheckFailed as e:
        log_error(str(e))
        for failure in e.failures:
            log_error(failure)
        return EXIT_ORACLE
    except ConfigurationError as e:
        log_error("Configuration error", e)
        return EXIT_CONFIG
    except NumericalError as e:
        log_error("Numerical failure", e)
        return EXIT_NUMERICAL
    log_step("Done", symbol="✅")
    return EXIT_OK
