"""Exception hierarchy shared by all modules.

The three base classes map onto CLI exit codes: ``InputError`` -> 2,
``ValidationFailure`` -> 3, anything else deriving from ``BitextError`` -> 1.
"""

from __future__ import annotations


class BitextError(Exception):
    exit_code = 1


class InputError(BitextError):
    exit_code = 2


class ValidationFailure(BitextError):
    exit_code = 3
