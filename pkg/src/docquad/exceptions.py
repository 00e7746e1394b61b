"""Exception hierarchy.

Every error raised by the library derives from :class:`DocQuadError`. Data and
validation problems derive from :class:`DataError` (also a ``ValueError``);
filesystem problems derive from :class:`DataIOError` (also an ``OSError``).
The CLI maps the two families onto distinct exit codes.
"""


class DocQuadError(Exception):
    """Base class for all library errors."""


class DataError(DocQuadError, ValueError):
    """Invalid input data or parameters."""


class DataIOError(DocQuadError, OSError):
    """A file could not be read or written."""


# geometry
class InvalidPolygon(DataError):
    pass


class InvalidClipRegion(DataError):
    pass


class DegenerateFit(DataError):
    pass


class DegenerateQuad(DataError):
    pass


class PointAtInfinity(DataError):
    pass


# raster / augment
class InvalidParameter(DataError):
    pass


class ObjectTooLarge(DataError):
    pass


# detect
class InvalidCell(DataError, IndexError):
    pass


# ocr_metric
class AlignmentError(DataError):
    pass


# dataset_io
class ManifestNotFound(DataIOError, FileNotFoundError):
    pass


class MalformedFile(DataError):
    pass


class DuplicateId(DataError):
    def __init__(self, item_id):
        super().__init__(f"duplicate item id: {item_id!r}")
        self.item_id = item_id


class DanglingPath(DataError):
    def __init__(self, path, item_id=None):
        where = f" (item {item_id!r})" if item_id is not None else ""
        super().__init__(f"referenced file does not exist: {path}{where}")
        self.path = path
        self.item_id = item_id


class ShapeMismatch(DataError):
    pass


class OutOfRange(DataError):
    pass


# harness
class MissingPrediction(DataError):
    def __init__(self, item_id, what="prediction"):
        super().__init__(f"item {item_id!r} has no {what}")
        self.item_id = item_id


class TooFewItems(DataError):
    pass


class UnknownOperation(DataError):
    pass
