#!/usr/bin/env python
# coding: utf8

""" Centralized logging facilities.

Records go to a dated log file at DEBUG level and, through typer, to stderr at the console level.
Command results are printed on stdout only, so verdict JSON can be piped.
"""

import logging
import os
from pathlib import Path
from datetime import datetime

from typer import echo

LEVELS = (logging.WARNING, logging.INFO, logging.DEBUG)

logdir = Path(os.getenv('TBPP_LOG_DIR', Path.home() / 'logs' / 'TBPP-check'))
logfile = logdir / f'{datetime.now().strftime(format="%Y-%m-%d")}.log'
logfile.parent.mkdir(parents=True, exist_ok=True)


class TyperLoggerHandler(logging.Handler):
    """ Echo records on stderr. """

    def emit(self, record: logging.LogRecord) -> None:
        echo(self.format(record), err=True)


format = "[%(asctime)s] %(levelname)s: %(name)s: %(message)s"
formatter = logging.Formatter(format)
logging.basicConfig(
    filename=logfile,
    level=logging.DEBUG,
    format=format,
)
handler = TyperLoggerHandler()
handler.setFormatter(formatter)
handler.setLevel(logging.INFO)
logger: logging.Logger = logging.getLogger('TBPP')
logger.addHandler(handler)


def set_verbosity(verbosity: int) -> int:
    '''
    Set the console level: 0 shows warnings, 1 info (the default) and 2 or more debug records.
    The log file always receives everything.

    :return: the console level.
    '''
    level = LEVELS[max(0, min(verbosity, len(LEVELS) - 1))]
    handler.setLevel(level)
    return level
