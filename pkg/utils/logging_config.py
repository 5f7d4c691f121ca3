import logging
import os
import sys

THIRD_PARTY_LOGGERS = ["matplotlib", "numba", "PIL", "asyncio", "urllib3"]


def setup_logging(verbose: bool = False) -> None:
    """One stdout handler for the whole package; ACMS_LOGGING_LEVEL picks the level."""
    log_type = "debug" if verbose else os.getenv("ACMS_LOGGING_LEVEL", "info").lower()

    root = logging.getLogger()
    if root.hasHandlers():
        root.setLevel(logging.DEBUG if log_type == "debug" else root.level)
        return

    class PackageFormatter(logging.Formatter):
        def format(self, record):
            if isinstance(record.name, str) and "." in record.name:
                record.name = record.name.split(".")[-2]
            return super().format(record)

    console = logging.StreamHandler(sys.stdout)
    console.setFormatter(PackageFormatter("%(levelname)-8s [%(name)s] %(message)s"))
    root.addHandler(console)

    if log_type == "debug":
        root.setLevel(logging.DEBUG)
    elif log_type == "warning":
        root.setLevel(logging.WARNING)
    elif log_type == "error":
        root.setLevel(logging.ERROR)
    else:
        root.setLevel(logging.INFO)

    for name in THIRD_PARTY_LOGGERS:
        third_party = logging.getLogger(name)
        third_party.setLevel(logging.ERROR)
        third_party.propagate = False
