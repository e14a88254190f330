import logging
import os
import unicodedata
from typing import AbstractSet, FrozenSet, Optional

from clickbait_id import config
from clickbait_id.exceptions import DataError

__all__ = ['normalize_text', 'load_stopwords', 'remove_stopwords']

logger = logging.getLogger(__name__)

SASTRAWI = 'sastrawi'


def normalize_text(raw: str) -> str:
    """NFC-normalize, collapse whitespace runs to single spaces and trim. Case is preserved."""
    return ' '.join(unicodedata.normalize('NFC', raw).split())


def load_stopwords(source: Optional[str] = None) -> FrozenSet[str]:
    """Load a lowercased stopword set.

    Args:
        source: a UTF-8 file with one word per line, the literal ``'sastrawi'`` for the PySastrawi list, or None for
            the bundled Indonesian list.
    """
    if source == SASTRAWI:
        from Sastrawi.StopWordRemover.StopWordRemoverFactory import StopWordRemoverFactory

        words = StopWordRemoverFactory().get_stop_words()
        logger.info("Loaded {} PySastrawi stopwords.".format(len(words)))
        return frozenset(w.strip().lower() for w in words if w.strip())

    path = config.DEFAULT_STOPWORDS_PATH if source is None else source
    if not os.path.exists(path):
        raise DataError("Stopword file '{}' does not exist".format(path))
    with open(path, 'r', encoding='utf-8') as f:
        words = frozenset(line.strip().lower() for line in f if line.strip())
    logger.info("Loaded {} stopwords from '{}'.".format(len(words), path))
    return words


def remove_stopwords(text: str, stopwords: AbstractSet[str]) -> str:
    """Drop whitespace-delimited words whose lowercase form is a stopword.

    Matching is on the whole word, so punctuation attached to a word keeps it (and its punctuation) in the text.
    """
    return ' '.join(word for word in text.split() if word.lower() not in stopwords)
