"""Exception types shared across the engine."""

from __future__ import annotations

__all__ = [
    "SkillforgeError",
    "QueryError",
    "InferenceError",
    "ReplayError",
    "GraphCycleError",
    "CondenseError",
    "DiffError",
    "GraphImportError",
]


class SkillforgeError(Exception):
    """Base class for all engine-level failures."""


class QueryError(SkillforgeError):
    """A graph query names unknown ids or violates domain constraints."""


class InferenceError(SkillforgeError):
    """Construction hit a knowledge-base defect (e.g. an illegal edge).

    Carries the trace prefix recorded up to the failure so the defect
    can be located in the KB.
    """

    def __init__(self, message: str, trace_prefix: tuple = ()):
        super().__init__(message)
        self.trace_prefix = trace_prefix


class ReplayError(SkillforgeError):
    """A construction trace does not apply cleanly to the KB."""

    def __init__(self, message: str, step_index: int | None = None):
        super().__init__(message)
        self.step_index = step_index


class GraphCycleError(SkillforgeError):
    """A graph expected to be acyclic contains a cycle."""

    def __init__(self, cycle: list[str]):
        super().__init__("cycle detected: " + " -> ".join(cycle))
        self.cycle = cycle


class CondenseError(SkillforgeError):
    """Condensation would merge nodes into a cyclic graph."""

    def __init__(self, message: str, super_skill: str):
        super().__init__(message)
        self.super_skill = super_skill


class DiffError(SkillforgeError):
    """Graphs from different knowledge bases cannot be diffed."""


class GraphImportError(SkillforgeError):
    """Graph JSON violates the documented schema."""

    def __init__(self, message: str, pointer: str):
        super().__init__(f"{pointer}: {message}")
        self.pointer = pointer
