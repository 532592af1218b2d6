import logging
import sys
from typing import Optional
from colorama import Fore, Style, init

# Initialize colorama for cross-platform colored output
init(autoreset=True)

DEFAULT_FORMAT = '%(asctime)s | %(levelname)-8s | %(name)s:%(lineno)d | %(message)s'


class ColoredFormatter(logging.Formatter):
    """
    Formatter that colours level names for terminal readability.

    The record itself is left untouched so other handlers (the log file)
    still see plain text.
    """

    COLORS = {
        'DEBUG': Fore.CYAN,
        'INFO': Fore.GREEN,
        'WARNING': Fore.YELLOW,
        'ERROR': Fore.RED,
        'CRITICAL': Fore.RED + Style.BRIGHT,
    }

    def format(self, record):
        original_levelname = record.levelname
        color = self.COLORS.get(original_levelname)
        if color:
            record.levelname = f"{color}{original_levelname}{Style.RESET_ALL}"
        try:
            message = super().format(record)
        finally:
            record.levelname = original_levelname

        if record.levelno >= logging.ERROR:
            return f"{Fore.RED}{message}{Style.RESET_ALL}"
        if record.levelno >= logging.WARNING:
            return f"{Fore.YELLOW}{message}{Style.RESET_ALL}"
        return message


def setup_logging(
    level: int = logging.WARNING,
    log_file: Optional[str] = None,
    use_colors: bool = True,
    format_string: Optional[str] = None
) -> logging.Logger:
    """
    Set up the ``gapflow`` logger.

    Diagnostics go to stderr; stdout is reserved for data written by the CLI.

    Args:
        level: Logging level (default: WARNING)
        log_file: Optional file path to write logs to
        use_colors: Whether to use colored output (default: True)
        format_string: Custom format string (optional)

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger('gapflow')
    logger.setLevel(level)
    logger.handlers.clear()

    if format_string is None:
        format_string = DEFAULT_FORMAT

    if use_colors:
        formatter = ColoredFormatter(format_string)
    else:
        formatter = logging.Formatter(format_string)

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(level)
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    if log_file:
        file_handler = logging.FileHandler(log_file)
        file_handler.setLevel(level)
        # Use non-colored formatter for file output
        file_handler.setFormatter(logging.Formatter(format_string))
        logger.addHandler(file_handler)

    return logger


def get_logger(name: str = None) -> logging.Logger:
    """
    Get a logger under the ``gapflow`` hierarchy.

    Args:
        name: Logger name (defaults to 'gapflow')

    Returns:
        Logger instance
    """
    if name is None:
        name = 'gapflow'
    return logging.getLogger(name)


def quick_setup(level: int = logging.INFO) -> logging.Logger:
    """
    Quick setup for colored terminal logging.

    Args:
        level: Logging level (default: INFO)

    Returns:
        Configured logger instance
    """
    return setup_logging(level=level, use_colors=True)
