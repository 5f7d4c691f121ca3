from utils.errors import AcmsError, ConfigurationError, NumericalError, OracleCheckFailed
from utils.logging_config import setup_logging
from utils.timing import Stopwatch, time_execution_sync
from utils.utils import log_error, log_json_block, log_step, render_records, save_json_log

__all__ = [
    "AcmsError",
    "ConfigurationError",
    "NumericalError",
    "OracleCheckFailed",
    "setup_logging",
    "Stopwatch",
    "time_execution_sync",
    "log_error",
    "log_json_block",
    "log_step",
    "render_records",
    "save_json_log",
]
