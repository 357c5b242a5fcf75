"""Shared error taxonomy.

Every error that crosses a module boundary carries a stable machine-readable
``code`` so the HTTP service and the CLI can map failures without string
matching. The codes are: ``contract-error``, ``format-error``, ``not-found``,
``insufficient-budget`` and ``timeout``.
"""

from __future__ import annotations


class GraphAtlasError(Exception):
    """Base class for all errors raised by this package."""

    code = "error"


class ContractError(GraphAtlasError):
    """A caller violated an operation's preconditions."""

    code = "contract-error"


class InfeasibleError(ContractError):
    """The requested configuration cannot be satisfied (k > n, tree too deep)."""


class FormatError(GraphAtlasError):
    """Malformed input text or a corrupt/truncated tree file.

    ``line`` is set for text parse errors, ``offset``/``section`` for binary
    file errors.
    """

    code = "format-error"

    def __init__(self, message: str, *, line: int | None = None,
                 offset: int | None = None, section: str | None = None):
        detail = message
        if line is not None:
            detail = f"{message} (line {line})"
        elif section is not None and offset is not None:
            detail = f"{message} (section {section!r}, offset {offset})"
        elif section is not None:
            detail = f"{message} (section {section!r})"
        super().__init__(detail)
        self.line = line
        self.offset = offset
        self.section = section


class NotFoundError(GraphAtlasError):
    """A referenced id, label or dataset does not exist."""

    code = "not-found"


class InsufficientBudgetError(GraphAtlasError):
    """A connection subgraph cannot be completed within the node budget."""

    code = "insufficient-budget"

    def __init__(self, message: str, disconnected_sources: tuple = ()):
        super().__init__(message)
        self.disconnected_sources = tuple(disconnected_sources)


class ExtractionTimeout(GraphAtlasError):
    """An extraction exceeded the configured time budget."""

    code = "timeout"
