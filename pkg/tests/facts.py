"""Hand-written probabilities of the default EPR scenario."""

from fractions import Fraction as F

# EPR facts table written out by hand, keyed by label pairs
DEFAULT_FACTS = {
    "singles": {
        "A": F(1, 4), "A'": F(1, 4), "B": F(1, 4), "B'": F(1, 4),
        "a": F(1, 2), "a'": F(1, 2), "b": F(1, 2), "b'": F(1, 2),
    },
    "pairs": {
        ("A", "a"): F(1, 4), ("A'", "a'"): F(1, 4), ("B", "b"): F(1, 4), ("B'", "b'"): F(1, 4),
        ("A", "a'"): 0, ("A'", "a"): 0, ("B", "b'"): 0, ("B'", "b"): 0,
        ("A", "B"): F(3, 32), ("A", "B'"): F(3, 32), ("A'", "B'"): F(3, 32),
        ("A'", "B"): 0,
        ("a", "a'"): 0, ("b", "b'"): 0,
        ("a", "b"): F(1, 4), ("a", "b'"): F(1, 4), ("a'", "b"): F(1, 4), ("a'", "b'"): F(1, 4),
        ("A", "b"): F(1, 8), ("A", "b'"): F(1, 8), ("A'", "b"): F(1, 8), ("A'", "b'"): F(1, 8),
        ("B", "a"): F(1, 8), ("B", "a'"): F(1, 8), ("B'", "a"): F(1, 8), ("B'", "a'"): F(1, 8),
        # same-side detectors never fire together
        ("A", "A'"): 0, ("B", "B'"): 0,
    },
}
