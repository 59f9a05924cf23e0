"""
dyncrowd Command Line Interface

This module provides the ``dyncrowd`` command-line tool.
"""

__all__ = ['main']


def main(argv=None):
    """Entry point for the dyncrowd command-line tool."""
    from .cli import main as _main
    return _main(argv)
