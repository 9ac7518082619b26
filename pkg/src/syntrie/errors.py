class ValidationError(ValueError):
    """Bad input data: empty strings, malformed rule lines, scores < 1, ..."""


class ExpansionLimitError(RuntimeError):
    """Rewrite enumeration exceeded its variant cap (pathological rule set)."""


class SnapshotError(RuntimeError):
    """Index snapshot is corrupt, truncated or has an unknown version."""
