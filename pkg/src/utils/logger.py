import logging
import sys

def setup_logger(name="sapers", level=logging.INFO):
    """
    Sets up a logger with a consistent format.
    """
    logger = logging.getLogger(name)
    logger.setLevel(level)

    # Check if handler already exists to avoid duplicates
    if not logger.handlers:
        handler = logging.StreamHandler(sys.stderr)
        formatter = logging.Formatter(
            '[%(levelname)s] %(message)s'
        )
        handler.setFormatter(formatter)
        logger.addHandler(handler)

    return logger


def set_verbose(verbose: bool):
    """Switches the shared logger and the library loggers between INFO and DEBUG."""
    level = logging.DEBUG if verbose else logging.INFO
    logger.setLevel(level)
    logging.getLogger("core").setLevel(level)
    if verbose and not logging.getLogger("core").handlers:
        for handler in logger.handlers:
            logging.getLogger("core").addHandler(handler)


# Create a default logger instance
logger = setup_logger()
