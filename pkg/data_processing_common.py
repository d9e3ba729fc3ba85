import contextlib
import logging
import os
from fractions import Fraction
from typing import Iterable, Optional, Union

from rich.console import Console
from rich.logging import RichHandler
from rich.progress import Progress, TextColumn, BarColumn, TimeElapsedColumn

Number = Union[int, Fraction]

LOG_FORMAT = "%(message)s"
FILE_LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


class ComplexityError(Exception):
    """Base class for every error raised by the analysis pipeline."""


class InputError(ComplexityError, ValueError):
    """Malformed class, spec, file or argument."""


class NoDenominator(InputError):
    """The anticanonical class is not in the nonnegative span of D(Y)."""


class InsufficientAnnotations(InputError):
    """An lc question depends on incidences the annotations do not declare."""


class VerificationError(ComplexityError):
    """A certificate or internal consistency check failed."""


class ModelInconsistencyError(VerificationError):
    """Lattice data contradicts the surface model (signals an invalid spec)."""


class CertificateInvalid(VerificationError):
    """A slave-divisor audit found a class violating a required inequality."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


def to_fraction(value) -> Fraction:
    """Parse an int, Fraction or "p/q" string into an exact Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise InputError(f"Expected a rational number, got {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError):
            raise InputError(f"Malformed rational '{value}', expected 'p/q'") from None
    raise InputError(f"Expected a rational number, got {value!r}")


def format_fraction(value: Number) -> str:
    """Render an exact rational as "p/q" (or "n" for integers)."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def format_interval(interval) -> Optional[list]:
    if interval is None:
        return None
    lo, hi = interval
    return [format_fraction(lo), format_fraction(hi)]


def setup_logging(silent=False, log_file=None, verbose=False):
    """Configure the root logger: rich on stderr, or the log file in silent mode."""
    level = logging.DEBUG if verbose else logging.INFO
    handlers = []
    if log_file:
        file_handler = logging.FileHandler(log_file, encoding='utf-8')
        file_handler.setFormatter(logging.Formatter(FILE_LOG_FORMAT))
        handlers.append(file_handler)
    if not silent:
        handlers.append(RichHandler(console=Console(stderr=True), show_path=False,
                                    level=level if verbose else logging.WARNING))
    if not handlers:
        handlers.append(logging.NullHandler())
    logging.basicConfig(level=level, format=LOG_FORMAT, handlers=handlers, force=True)


@contextlib.contextmanager
def silenced_stdout(log_file=None):
    """Route stray prints to the log file, or to the null device, until the context closes."""
    with open(log_file or os.devnull, 'a', encoding='utf-8') as sink, contextlib.redirect_stdout(sink):
        yield sink


def report_message(message, silent=False, log_file=None):
    """Print a message, or append it to the log file in silent mode."""
    if silent:
        if log_file:
            with open(log_file, 'a', encoding='utf-8') as f:
                f.write(message + '\n')
    else:
        print(message)


def make_progress(silent=False) -> Progress:
    """Progress bar with the project's standard columns."""
    return Progress(
        TextColumn("[progress.description]{task.description}"),
        BarColumn(),
        TimeElapsedColumn(),
        transient=True,
        disable=silent,
        console=Console(stderr=True),
    )


def track(items: Iterable, description: str, silent=False):
    """Iterate over items while advancing a progress bar."""
    items = list(items)
    with make_progress(silent) as progress:
        task = progress.add_task(description, total=len(items))
        for item in items:
            yield item
            progress.advance(task)
