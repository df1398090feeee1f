"""Eisenstein ideals, modular symbols and cyclotomic K2 at prime level."""

__version__ = "0.1.0"

from .arith import admissible_pairs, merel_log, stickelberger_log  # noqa: F401
