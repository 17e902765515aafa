"""Exception hierarchy shared by every module.

The CLI maps any :class:`MeshSieveError` to exit status 2 (data error).
"""


class MeshSieveError(Exception):
    pass


class SieveError(MeshSieveError):
    """Malformed covering relation (self-arrow, negative point id)."""


class CycleError(SieveError):
    """The covering relation is not acyclic, so it cannot be stratified."""


class SectionError(MeshSieveError):
    pass


class DimensionError(SectionError):
    """Value tuple length disagrees with a point's fiber dimension."""


class OverlapError(MeshSieveError):
    pass


class CommError(MeshSieveError):
    pass


class CollectiveMismatchError(CommError):
    """Ranks disagree about which collective phase they are in."""


class GroupAborted(CommError):
    """Raised in surviving ranks after another rank failed."""


class ProtocolError(MeshSieveError):
    """Completion payload disagrees with the announced sizes."""


class PartitionError(MeshSieveError):
    pass


class ConsistencyError(MeshSieveError):
    """Local pieces disagree over an identified point."""


class MeshFormatError(MeshSieveError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
