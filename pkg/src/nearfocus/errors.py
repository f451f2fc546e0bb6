"""Exception types raised by nearfocus."""


class DomainError(ValueError):
    """An argument lies outside the domain an operation is defined on."""


class CodebookFileError(DomainError):
    """A codebook file could not be parsed."""


class CodebookMismatchError(DomainError):
    """A codebook file was built for a different scene or region."""


class ChecksumMismatchError(CodebookMismatchError):
    """Regenerated phases disagree with the checksum stored in the file."""
