"""
Tokenizer Errors
Exception hierarchy shared by all tokenizer modules
"""

from typing import Optional


class TokenizerError(Exception):
    """Base class for every domain error (CLI exit status 1)"""


class ConfigError(TokenizerError):
    """Invalid or inconsistent settings"""


class CorpusDecodeError(TokenizerError):
    """Input bytes are not valid UTF-8"""

    def __init__(self, offset: int, reason: str):
        self.offset = offset
        self.reason = reason
        super().__init__(f"Ungültiges UTF-8 bei Byte-Offset {offset}: {reason}")


class EmptyCorpusError(TokenizerError):
    """Training was requested on a corpus without words"""

    def __init__(self):
        super().__init__("Der Korpus enthält keine Wörter.")


class UntokenizableWordError(TokenizerError):
    """A word cannot be segmented with the given vocabulary"""

    def __init__(self, word: str, character: Optional[str] = None, position: Optional[int] = None):
        self.word = word
        self.character = character
        self.position = position
        if character is not None:
            message = f"Wort '{word}' nicht tokenisierbar: Zeichen '{character}' (Position {position}) fehlt im Vokabular"
        else:
            message = f"Wort '{word}' nicht tokenisierbar: kein Pfad durch das Gitter"
        super().__init__(message)


class VocabularyError(TokenizerError):
    """Vocabulary violates one of its invariants"""


class ModelFormatError(TokenizerError):
    """A model or vocabulary file could not be parsed"""

    def __init__(self, path: str, line_number: int, reason: str):
        self.path = path
        self.line_number = line_number
        super().__init__(f"{path}:{line_number}: {reason}")


class OracleLimitError(TokenizerError):
    """Exhaustive enumeration refused because the input is too large"""

    def __init__(self, limit: int, actual: int):
        self.limit = limit
        self.actual = actual
        super().__init__(f"Wortlänge {actual} überschreitet die Grenze {limit} der exakten Berechnung")


class PathLimitError(TokenizerError):
    """Lattice has more paths than the caller allowed to enumerate"""

    def __init__(self, limit: int, count: int):
        self.limit = limit
        self.count = count
        super().__init__(f"Gitter hat {count} Pfade, Grenze ist {limit}")


class RejectionLimitError(TokenizerError):
    """Rejection sampler gave up"""

    def __init__(self, word: str, rejections: int):
        self.word = word
        self.rejections = rejections
        super().__init__(f"Verwerfungsgrenze für '{word}' nach {rejections} Versuchen erreicht")
