"""Exception hierarchy shared by every numlab module."""


class NumlabError(Exception):
    """Base class for all numlab errors."""


class InputError(NumlabError, ValueError):
    """Raised when an argument is malformed or out of range."""


class ParseError(InputError):
    """Raised when a space expression does not match the grammar.

    ``offset`` is the byte offset into the source text where parsing failed.
    """

    def __init__(self, message, offset):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class SemanticError(InputError):
    """Raised when an expression parses but carries invalid parameters."""


class UnsupportedRepresentation(NumlabError):
    """Raised when an operation needs a representation the space lacks."""
