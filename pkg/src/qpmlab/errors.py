"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class QPMError(Exception):
    """Base class for all errors raised by qpmlab."""


class PointOutOfDomain(QPMError, ValueError):
    pass


class GridRequired(QPMError, ValueError):
    pass


class NegativeRadius(QPMError, ValueError):
    pass


class EmptyTail(QPMError, ValueError):
    pass


class NegativeEntry(QPMError, ValueError):
    pass


class NonzeroDiagonal(QPMError, ValueError):
    pass


class EmptySet(QPMError, ValueError):
    pass


class NegativeArgument(QPMError, ValueError):
    pass


class RatioOutOfRange(QPMError, ValueError):
    pass


class EmptyImage(QPMError, ValueError):
    pass


class NoFeasibleSuccessor(QPMError, RuntimeError):
    pass


class TraceTooShort(QPMError, ValueError):
    pass


class UnknownRule(QPMError, ValueError):
    def __init__(self, name: str):
        super().__init__(f"unknown rule: {name!r}")
        self.name = name


class UnknownVariant(QPMError, ValueError):
    def __init__(self, name: str):
        super().__init__(f"unknown variant: {name!r}")
        self.name = name


class SchemaError(QPMError, ValueError):
    """One or more config validation failures, each tagged with a JSON path."""

    def __init__(self, errors: list[tuple[str, str]]):
        self.errors = list(errors)
        msg = "; ".join(f"{path}: {text}" for path, text in self.errors)
        super().__init__(msg)

    @property
    def paths(self) -> list[str]:
        return [path for path, _ in self.errors]
