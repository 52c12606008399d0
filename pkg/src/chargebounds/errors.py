"""Exception hierarchy shared by all modules."""


class ChargeBoundsError(Exception):
    """Base class for every error raised by this package."""


class ResourceError(ChargeBoundsError):
    """A configured cap (level, atoms, nonzeros, rows) would be exceeded."""


class LevelTooLargeError(ResourceError):
    def __init__(self, n, cap):
        super().__init__(f"level {n} exceeds the level cap of {cap}")
        self.n = n
        self.cap = cap


class ComplexityError(ResourceError):
    """Normalization produced more atoms than the configured budget."""


class ParseError(ChargeBoundsError):
    """Syntax or literal error in a set expression, with its byte offset."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (at byte {offset})")
        self.message = message
        self.offset = offset


class ElementNotPresentError(ChargeBoundsError):
    pass


class DonorShortageError(ChargeBoundsError):
    def __init__(self, recipients, donors):
        super().__init__(
            f"redirect needs card(proj_i & A_i) <= card(proj_j & A_j), "
            f"got {recipients} > {donors}"
        )
        self.recipients = recipients
        self.donors = donors


class InternalError(ChargeBoundsError):
    """A report invariant failed; this indicates a bug."""
