import os
import time
import logging
from functools import wraps
from dotenv import load_dotenv

load_dotenv()

_LEVEL_METHODS = {
    logging.DEBUG: "debug",
    logging.INFO: "info",
    logging.WARNING: "warning",
    logging.ERROR: "error",
}


def _log_dir():
    return os.getenv("RVINE_LOG_DIR", "./logs")


class Logger:
    """Thin wrapper over ``logging`` writing to ``<log dir>/<name>.log``.

    Outside the development environment (``ENV`` != "development") every
    message is dropped through a ``NullHandler``.
    """

    def __init__(self, name: str, see_time: bool = False, console_log: bool = False, level: int = logging.INFO):
        self.name = name
        self.is_dev = os.getenv("ENV", "development") == "development"
        self.logger = logging.getLogger(f"rvine.{name}")
        self.logger.setLevel(level)
        self.logger.propagate = False

        if not self.is_dev:
            if not self.logger.handlers:
                self.logger.addHandler(logging.NullHandler())
            return

        # handlers are shared per name
        if self.logger.handlers:
            return

        log_dir = _log_dir()
        os.makedirs(log_dir, exist_ok=True)

        formatter = logging.Formatter(
            "%(asctime)s - %(name)s - %(levelname)s - %(message)s" if see_time else "%(levelname)s - %(message)s"
        )

        file_handler = logging.FileHandler(os.path.join(log_dir, f"{name}.log"))
        file_handler.setFormatter(formatter)
        self.logger.addHandler(file_handler)

        if console_log:
            console_handler = logging.StreamHandler()
            console_handler.setFormatter(formatter)
            self.logger.addHandler(console_handler)

    def log_message(self, message: str, level: int = logging.INFO):
        if not self.is_dev:
            return
        getattr(self.logger, _LEVEL_METHODS.get(level, "info"))(message)

    def debug(self, message: str):
        self.log_message(message, logging.DEBUG)

    def info(self, message: str):
        self.log_message(message, logging.INFO)

    def warning(self, message: str):
        self.log_message(message, logging.WARNING)

    def error(self, message: str):
        self.log_message(message, logging.ERROR)

    def disable_logging(self):
        self.logger.disabled = True

    def cleanup(self):
        """Close all file handlers."""
        for handler in self.logger.handlers[:]:
            if isinstance(handler, logging.FileHandler):
                handler.close()
                self.logger.removeHandler(handler)


def log_time(func):
    """Record the wall time of ``func`` in ``<func>_time.log``."""
    @wraps(func)
    def wrapper(*args, **kwargs):
        if os.getenv("ENV", "development") != "development":
            return func(*args, **kwargs)
        start_time = time.perf_counter()
        result = func(*args, **kwargs)
        elapsed = time.perf_counter() - start_time
        logger = Logger(func.__name__ + "_time", see_time=True)
        logger.log_message(f"Function: {func.__name__}, Execution time: {round(elapsed, 5)} seconds")
        return result
    return wrapper
