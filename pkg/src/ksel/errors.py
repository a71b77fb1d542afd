"""Exception types shared across the package."""


class KselError(Exception):
    """Base class for errors raised by ksel."""


class DataError(KselError):
    """Malformed input data: files, tables, labels, or array shapes."""


class DegenerateBandwidth(KselError):
    """The median pairwise difference of a sample vector is zero."""


class NumericsError(KselError):
    """A numerical routine produced non-finite values (corrupt problem)."""
