"""
Root logger configuration for the command line
"""
import os
import logging

from utils.file_utils import create_directory_if_not_exists


LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def setup_logging(level="INFO", log_file=None):
    """
    Configure the root logger once per process

    Args:
        level (str): Logging level name
        log_file (str): Optional file that receives the same records

    Returns:
        logging.Logger: The root logger
    """
    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)
    root.setLevel(getattr(logging, str(level).upper(), logging.INFO))

    formatter = logging.Formatter(LOG_FORMAT)
    console = logging.StreamHandler()
    console.setFormatter(formatter)
    root.addHandler(console)

    if log_file:
        create_directory_if_not_exists(os.path.dirname(log_file))
        file_handler = logging.FileHandler(log_file, encoding="utf-8")
        file_handler.setFormatter(formatter)
        root.addHandler(file_handler)
    return root
