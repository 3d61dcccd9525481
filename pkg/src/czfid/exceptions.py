"""Package-level error types."""


class DegenerateDataError(RuntimeError):
    """Raised when measured data are too degenerate to support an estimate.

    Examples: an all-zero coincidence table, a zero reference count for some
    input block, or a vanishing row sum in the state-fidelity extraction.
    Distinct from ``ValueError`` so callers (and the CLI exit-code mapping)
    can tell bad data apart from bad arguments.
    """
