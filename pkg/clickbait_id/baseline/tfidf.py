import io
import logging
import zipfile
from dataclasses import dataclass
from typing import Dict, Sequence, Union

import numpy as np
import scipy.sparse as sp
from sklearn.feature_extraction.text import CountVectorizer
from sklearn.preprocessing import normalize

from clickbait_id.exceptions import ParamsFormatError
from clickbait_id.utils import atomic_write_bytes

__all__ = ['TfidfModel', 'tfidf_fit', 'tfidf_transform', 'save_tfidf', 'load_tfidf']

logger = logging.getLogger(__name__)

TFIDF_MAGIC = 'clickbait-id/tfidf'
TFIDF_VERSION = 1
# Lowercased word-character runs; punctuation and whitespace both separate terms.
TOKEN_PATTERN = r"(?u)\b\w+\b"


@dataclass
class TfidfModel:
    vocabulary: Dict[str, int]
    idf: np.ndarray
    doc_count: int

    @property
    def n_features(self) -> int:
        return len(self.vocabulary)

    def terms(self):
        """Terms in column order."""
        return sorted(self.vocabulary, key=self.vocabulary.get)


def _vectorizer(vocabulary=None) -> CountVectorizer:
    return CountVectorizer(lowercase=True, token_pattern=TOKEN_PATTERN, vocabulary=vocabulary)


def tfidf_fit(corpus: Sequence[str]) -> TfidfModel:
    """Fit the vocabulary and the smoothed idf ``ln((1 + N) / (1 + df)) + 1``."""
    if len(corpus) == 0:
        raise ValueError("Cannot fit TF-IDF on an empty corpus")

    vectorizer = _vectorizer()
    try:
        counts = vectorizer.fit_transform(corpus)
    except ValueError:
        # Every document is empty or punctuation only.
        logger.warning("TF-IDF corpus of {} document(s) holds no terms.".format(len(corpus)))
        return TfidfModel(vocabulary={}, idf=np.zeros(0), doc_count=len(corpus))

    df = np.asarray((counts > 0).sum(axis=0)).ravel()
    idf = np.log((1.0 + len(corpus)) / (1.0 + df)) + 1.0
    vocabulary = {term: int(index) for term, index in vectorizer.vocabulary_.items()}
    logger.debug("Fitted TF-IDF with {} term(s) over {} document(s).".format(len(vocabulary), len(corpus)))
    return TfidfModel(vocabulary=vocabulary, idf=idf, doc_count=len(corpus))


def tfidf_transform(model: TfidfModel, texts: Union[str, Sequence[str]]) -> sp.csr_matrix:
    """L2-normalized ``count * idf`` rows, one per text; a single string gives a one-row matrix.

    Unseen terms are ignored, so a text without known terms maps to an all-zero row.
    """
    if isinstance(texts, str):
        texts = [texts]
    if model.n_features == 0:
        return sp.csr_matrix((len(texts), 0), dtype=np.float64)
    if len(texts) == 0:
        return sp.csr_matrix((0, model.n_features), dtype=np.float64)

    counts = _vectorizer(model.vocabulary).transform(texts).astype(np.float64)
    weighted = sp.csr_matrix(counts.multiply(model.idf[np.newaxis, :]))
    return normalize(weighted, norm='l2', copy=False)


def save_tfidf(model: TfidfModel, path: str):
    terms = model.terms()
    buffer = io.BytesIO()
    np.savez(buffer, magic=np.array(TFIDF_MAGIC), version=np.array(TFIDF_VERSION),
             terms=np.array(terms, dtype=np.str_), idf=np.asarray(model.idf, dtype='<f8'),
             doc_count=np.array(model.doc_count, dtype='<i8'))
    atomic_write_bytes(path, buffer.getvalue())


def load_tfidf(path: str) -> TfidfModel:
    try:
        with np.load(path, allow_pickle=False) as archive:
            fields = {key: archive[key] for key in archive.files}
    except (OSError, ValueError, zipfile.BadZipFile) as e:
        raise ParamsFormatError("Cannot read TF-IDF model '{}': {}".format(path, e))

    if str(fields.get('magic')) != TFIDF_MAGIC:
        raise ParamsFormatError("'{}' is not a TF-IDF model file".format(path))
    if int(fields['version']) != TFIDF_VERSION:
        raise ParamsFormatError("TF-IDF model '{}' has version {}, expected {}".format(
            path, int(fields['version']), TFIDF_VERSION))
    terms, idf = fields['terms'].tolist(), fields['idf']
    if len(terms) != len(idf):
        raise ParamsFormatError("TF-IDF model '{}' has {} term(s) but {} idf value(s)".format(
            path, len(terms), len(idf)))
    return TfidfModel(vocabulary={term: i for i, term in enumerate(terms)}, idf=idf.astype(np.float64),
                      doc_count=int(fields['doc_count']))
