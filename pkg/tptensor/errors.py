from __future__ import annotations


class TensorError(ValueError):
    """Base class for every error raised by this package."""


class StructuralError(TensorError):
    """Declared (order, dim) do not match the stored entries."""


class InputError(TensorError):
    """An argument lies outside the documented domain."""


class EvaluationError(TensorError):
    def __init__(self, x: float, value: float) -> None:
        super().__init__(f"non-finite value {value!r} at x={x!r}")
        self.x = x
        self.value = value


class FormatError(TensorError):
    def __init__(self, message: str, token: str, line: int | None = None) -> None:
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{message} (offending token: {token!r})")
        self.token = token
        self.line = line
