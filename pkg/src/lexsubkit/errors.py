"""Exception hierarchy shared by all modules."""


class LexsubError(Exception):
    """Base class for all toolkit errors."""


class FileFormatError(LexsubError):
    """A file does not start with the expected magic bytes or layout."""


class AlignmentError(LexsubError):
    """Vocabulary sizes or vocabularies of two objects do not match."""


class CorruptFileError(LexsubError):
    """A payload ended before the declared number of records was read."""


class DatasetError(LexsubError):
    """A corpus file is malformed or internally inconsistent."""


class UnknownExampleError(LexsubError):
    """No stored distribution exists for the requested example id."""


class OutOfVocabularyError(LexsubError):
    """A required word (usually the target) is missing from a table."""
