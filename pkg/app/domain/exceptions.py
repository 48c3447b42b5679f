from typing import Optional


class TableScoutError(Exception):
    """Base class for every error raised by the table detection pipeline."""


# ---------- PDF ingestion ----------
class UnsupportedPdfFeature(TableScoutError):
    def __init__(self, feature: str):
        self.feature = feature
        super().__init__(f"Unsupported PDF feature: {feature}")


class MalformedPdf(TableScoutError):
    def __init__(self, message: str, offset: int = 0):
        self.offset = offset
        super().__init__(f"Malformed PDF at byte offset {offset}: {message}")


class EncryptedPdf(TableScoutError):
    def __init__(self, message: str = "Encrypted PDF documents are not supported"):
        super().__init__(message)


# ---------- interchange files ----------
class SchemaError(TableScoutError):
    def __init__(self, line_number: int, message: str):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {message}")


class ModelFormatError(TableScoutError):
    pass


# ---------- features / training ----------
class AnnotationLengthMismatch(TableScoutError):
    def __init__(self, expected: int, got: int, key: Optional[tuple] = None):
        self.expected = expected
        self.got = got
        where = f" for {key}" if key is not None else ""
        super().__init__(f"Annotation count {got} does not match token count {expected}{where}")


class FeatureMaskMismatch(TableScoutError):
    pass


class DegenerateData(TableScoutError):
    pass


# ---------- evaluation / corpus ----------
class AlignmentError(TableScoutError):
    pass


class EmptyCounts(TableScoutError):
    def __init__(self, message: str = "Cannot compute metrics over zero examples"):
        super().__init__(message)


class InsufficientDocuments(TableScoutError):
    pass
