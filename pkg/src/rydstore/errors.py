"""Exception types shared across the package, with CLI exit codes."""

from __future__ import annotations

from dataclasses import dataclass

EXIT_CONFIG = 2
EXIT_BLOWUP = 3
EXIT_IO = 4


@dataclass(frozen=True)
class Diagnostic:
    """One machine-readable validation finding: config path plus reason."""

    path: str
    reason: str

    def to_dict(self) -> dict:
        return {"path": self.path, "reason": self.reason}


class ConfigError(ValueError):
    """Configuration rejected. Carries the full diagnostic list."""

    def __init__(self, diagnostics):
        if isinstance(diagnostics, str):
            diagnostics = [Diagnostic("config", diagnostics)]
        self.diagnostics = list(diagnostics)
        lines = "; ".join(f"{d.path}: {d.reason}" for d in self.diagnostics)
        super().__init__(lines or "invalid configuration")


class GeometryError(ConfigError):
    pass


class GridError(ConfigError):
    pass


class DomainError(ValueError):
    """An argument fell outside the physical domain of an operation."""


class BlowUpError(RuntimeError):
    """Non-finite field values during time stepping."""

    def __init__(self, step: int, t: float):
        self.step = step
        self.t = t
        super().__init__(f"non-finite field values at step {step} (t = {t:.6g} us)")


class EmptySeriesError(RuntimeError):
    pass


class UndefinedDiagnosticError(RuntimeError):
    """The requested observable is undefined for this run (e.g. no spinwave)."""


class OutputError(RuntimeError):
    """File emission failed."""
