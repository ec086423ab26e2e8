import logging
from logging.handlers import RotatingFileHandler
from pathlib import Path

LOG_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"
LOG_FILE_NAME = "rbindex.log"


def setup_logging(level: str = "WARNING", log_dir: Path | None = None, to_file: bool = False) -> logging.Logger:
    logger = logging.getLogger("rbindex")
    logger.setLevel(level.upper())

    # Check if handlers already exist to avoid duplicate logs on repeated runs
    if not logger.handlers:
        # Console Handler (stderr; stdout carries command output)
        console_handler = logging.StreamHandler()
        console_handler.setFormatter(logging.Formatter(LOG_FORMAT))
        logger.addHandler(console_handler)

        # File Handler
        if to_file and log_dir is not None:
            log_dir.mkdir(parents=True, exist_ok=True)
            file_handler = RotatingFileHandler(
                log_dir / LOG_FILE_NAME, maxBytes=5 * 1024 * 1024, backupCount=3
            )
            file_handler.setFormatter(logging.Formatter(LOG_FORMAT))
            logger.addHandler(file_handler)

    return logger
