import logging
from logging import handlers

from rich.console import Console
from rich.logging import RichHandler

from spherot.common import expand_user, paths

spherot_logger = logging.getLogger('spherot')
spherot_logger.setLevel(logging.DEBUG)

DEF_FORMATTER = logging.Formatter('%(asctime)s - %(levelname)-5s - %(name)s - %(message)s')
CONSOLE_FORMATTER = logging.Formatter('%(message)s')

CONSOLE_HANDLER_NAME = 'console-handler'
FILE_HANDLER_NAME = 'file-handler'

LEVELS = ['debug', 'info', 'warning', 'error', 'critical', 'off']


def configure(level='warning', log_file_level='off', log_file_path=None):
    """Console logging goes to stderr, stdout carries the output documents."""
    if level == 'off' and log_file_level == 'off':
        spherot_logger.disabled = True
        return

    spherot_logger.disabled = False
    effective = logging.CRITICAL + 1

    if level != 'off':
        console_level = logging.getLevelName(level.upper())
        setup_console(console_level)
        effective = min(effective, console_level)

    if log_file_level != 'off':
        file_level = logging.getLevelName(log_file_level.upper())
        log_file_path = expand_user(log_file_path) or paths.log_file_path(create=True)
        setup_file(file_level, log_file_path)
        effective = min(effective, file_level)

    spherot_logger.setLevel(effective)


def setup_console(level):
    console_handler = RichHandler(console=Console(stderr=True), show_path=False, log_time_format="[%X]")
    console_handler.set_name(CONSOLE_HANDLER_NAME)
    console_handler.setLevel(level)
    console_handler.setFormatter(CONSOLE_FORMATTER)
    register_handler(console_handler)


def setup_file(level, file):
    file_handler = logging.handlers.WatchedFileHandler(file)
    file_handler.set_name(FILE_HANDLER_NAME)
    file_handler.setLevel(level)
    file_handler.setFormatter(DEF_FORMATTER)
    register_handler(file_handler)


def _find_handler(logger, name):
    for handler in logger.handlers:
        if handler.name == name:
            return handler

    return None


def register_handler(handler):
    previous = _find_handler(spherot_logger, handler.name)
    if previous:
        spherot_logger.removeHandler(previous)

    spherot_logger.addHandler(handler)
