"""Utility functions for the weak measurement toolkit"""

import os
import sys

# ---------------------------------------------------------------------------
# Tagged diagnostics. stdout is reserved for reports, so everything goes to
# stderr as "[tag] message".
# ---------------------------------------------------------------------------

_verbose = os.getenv("WEAKSIM_VERBOSE", "").lower() in ("1", "true", "yes", "on")


def set_verbose(enabled: bool) -> None:
    """Turn tagged progress logging on or off for this process"""
    global _verbose
    _verbose = bool(enabled)


def log(tag: str, message: str) -> None:
    """Print a progress line when verbose logging is enabled"""
    if _verbose:
        print(f"[{tag}] {message}", file=sys.stderr)


def warn(tag: str, message: str) -> None:
    """Print a warning line regardless of verbosity"""
    print(f"[{tag}] ⚠️  {message}", file=sys.stderr)


def format_number(value: float, digits: int = 12) -> str:
    """Render a real number at a fixed count of significant digits"""
    return f"{value:.{digits}g}"


def format_complex(value: complex, digits: int = 12) -> str:
    re = format_number(value.real, digits)
    im = format_number(abs(value.imag), digits)
    sign = "-" if value.imag < 0 else "+"
    return f"{re} {sign} {im}i"
