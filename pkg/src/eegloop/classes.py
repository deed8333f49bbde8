"""The four target epoch classes shared across the toolkit."""

CLASS_NAMES: tuple[str, ...] = ("sham_wake", "sham_sleep", "tbi_wake", "tbi_sleep")


def class_index(label: str) -> int:
    """Return the fixed index of a class label, raising on unknown labels."""
    try:
        return CLASS_NAMES.index(label)
    except ValueError:
        raise ValueError(f"unknown class label: {label!r}") from None
