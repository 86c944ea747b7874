"""Exception types raised by localdep."""


class DomainError(ValueError):
    """Argument outside the domain where a quantity is defined."""


class TieError(ValueError):
    """Tied observations under the ``strict`` tie policy."""


class ParseError(ValueError):
    """Malformed input file."""


class TieWarning(UserWarning):
    """Ties were resolved by mid-ranks; the theory assumes continuous marginals."""
