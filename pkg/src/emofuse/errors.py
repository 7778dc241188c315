"""Exception hierarchy shared by every module.

The CLI maps each class to a fixed exit status, so library code should raise
the most specific class that applies.
"""


class EmofuseError(ValueError):
    exit_code = 1


class ParseError(EmofuseError):
    """A data file is malformed. Carries the file and row when known."""

    exit_code = 2

    def __init__(self, message, path=None, row=None):
        self.path = path
        self.row = row
        where = []
        if path is not None:
            where.append(str(path))
        if row is not None:
            where.append(f"row {row}")
        prefix = ":".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class InvalidInputError(EmofuseError):
    exit_code = 3


class DegenerateGeometryError(EmofuseError):
    """Landmarks are too degenerate to align or measure (e.g. coincident points)."""

    exit_code = 4
