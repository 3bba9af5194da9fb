"""
Logging utility for fitzkit.
"""
import logging
import os
from pathlib import Path
from logging.handlers import RotatingFileHandler


class Logger:
    """Logger class for fitzkit runs"""

    def __init__(self, name: str = 'fitzkit', log_dir: str = None):
        self.name = name
        self.log_dir = Path(log_dir or os.environ.get('FITZKIT_LOG_DIR', 'logs'))
        self._setup_logger()

    def _setup_logger(self) -> None:
        """Setup logger with file and console handlers"""
        self.log_dir.mkdir(parents=True, exist_ok=True)

        self.logger = logging.getLogger(self.name)
        self.logger.setLevel(logging.DEBUG)
        self.logger.propagate = False
        if self.logger.handlers:
            # already configured by an earlier import
            return

        file_formatter = logging.Formatter(
            '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
        )
        console_formatter = logging.Formatter(
            '%(levelname)s - %(message)s'
        )

        file_handler = RotatingFileHandler(
            self.log_dir / f'{self.name}.log',
            maxBytes=10*1024*1024,  # 10MB
            backupCount=5,
            encoding='utf-8'
        )
        file_handler.setLevel(logging.DEBUG)
        file_handler.setFormatter(file_formatter)

        # stdout carries CLI tables and JSON, so diagnostics go to stderr
        console_handler = logging.StreamHandler()
        console_handler.setLevel(logging.WARNING)
        console_handler.setFormatter(console_formatter)

        self.logger.addHandler(file_handler)
        self.logger.addHandler(console_handler)

    def set_level(self, level: str) -> None:
        """
        Adjust the file handler threshold.

        Args:
            level: Level name such as "DEBUG" or "INFO"
        """
        numeric = logging.getLevelName(level.upper())
        if not isinstance(numeric, int):
            raise ValueError(f"Unknown logging level: {level}")
        for handler in self.logger.handlers:
            if isinstance(handler, RotatingFileHandler):
                handler.setLevel(numeric)


# --- Create and export a configured logger instance ---
_instance = Logger()
logger = _instance.logger


def set_logging_level(level: str) -> None:
    """Apply the configured level to the shared fitzkit logger."""
    _instance.set_level(level)
