class MinliftError(Exception):
    """Base class for every error raised by minlift."""


class DomainError(MinliftError, ValueError):
    """A point lies outside the disk on which an expression or mapping is valid."""


class PoleError(MinliftError, ArithmeticError):
    """A denominator vanished (or a value blew up) during evaluation."""


class UnknownNameError(MinliftError, KeyError):
    """A catalog, oracle or family name is not known."""

    def __str__(self):
        return str(self.args[0]) if self.args else "unknown name"


class DilatationMismatchError(MinliftError):
    """Two mappings that must share a dilatation do not."""


class DegenerateCurveError(MinliftError):
    """Consecutive samples of a boundary curve coincide."""


class MeshIOError(MinliftError, OSError):
    """Writing or reading a mesh file failed."""
