import logging
import logging.config
import os
from pathlib import Path

from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

_REPO_ROOT = Path(__file__).resolve().parents[2]

LOGGING_CONFIG = os.getenv("MPEAD_LOGGING_CONFIG", str(_REPO_ROOT / "logging.ini"))
LOG_LEVEL = os.getenv("MPEAD_LOG_LEVEL")
DEFAULT_WORKERS = int(os.getenv("MPEAD_WORKERS", "1"))
DEFAULT_ALGO = os.getenv("MPEAD_DEFAULT_ALGO", "ga")


def configure_logging(quiet: bool = False) -> None:
    """Set up logging for the command line. Library code never calls this."""
    if Path(LOGGING_CONFIG).is_file():
        logging.config.fileConfig(LOGGING_CONFIG, disable_existing_loggers=False)
    else:
        logging.basicConfig(format="%(levelname)-5.5s [%(name)s] %(message)s")

    package_logger = logging.getLogger("mpead")
    if quiet:
        package_logger.setLevel(logging.ERROR)
    elif LOG_LEVEL:
        package_logger.setLevel(LOG_LEVEL.upper())
