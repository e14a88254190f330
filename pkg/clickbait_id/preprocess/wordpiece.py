import logging
import unicodedata
from dataclasses import dataclass
from typing import AbstractSet, List, Optional

import numpy as np

from clickbait_id import config
from clickbait_id.preprocess.text import normalize_text, remove_stopwords
from clickbait_id.preprocess.vocab import Vocab

__all__ = ['TokenSequence', 'split_punctuation', 'wordpiece_tokenize', 'encode_sequence', 'HeadlineEncoder']

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class TokenSequence:
    """Fixed-length encoder input: ``[CLS] tokens [SEP]`` followed by padding."""
    ids: np.ndarray
    attention_mask: np.ndarray
    original_length: int

    def __len__(self):
        return len(self.ids)


def _is_punctuation(char: str) -> bool:
    cp = ord(char)
    # ASCII symbols such as "$" or "^" are not Unicode punctuation but are split like it.
    if 33 <= cp <= 47 or 58 <= cp <= 64 or 91 <= cp <= 96 or 123 <= cp <= 126:
        return True
    return unicodedata.category(char).startswith('P')


def split_punctuation(text: str) -> str:
    """Surround every punctuation character with spaces, as the standard BERT basic tokenizer does."""
    return ''.join(' {} '.format(c) if _is_punctuation(c) else c for c in text)


def wordpiece_tokenize(text: str, vocab: Vocab, split_punct: bool = False,
                       max_input_chars_per_word: Optional[int] = None) -> List[str]:
    """Greedy longest-match-first WordPiece segmentation of each whitespace-delimited word.

    Non-initial pieces are looked up with the vocabulary's continuation prefix. A word without a complete
    segmentation becomes a single unknown token, as does any word longer than ``max_input_chars_per_word`` when a
    cap is given.
    """
    if split_punct:
        text = split_punctuation(text)

    prefix = vocab.continuation_prefix
    output = []
    for word in text.split():
        if max_input_chars_per_word is not None and len(word) > max_input_chars_per_word:
            output.append(vocab.unk_token)
            continue

        pieces = []
        start = 0
        while start < len(word):
            end = len(word)
            piece = None
            while start < end:
                candidate = word[start:end] if start == 0 else prefix + word[start:end]
                if candidate in vocab.token_to_id:
                    piece = candidate
                    break
                end -= 1
            if piece is None:
                pieces = None
                break
            pieces.append(piece)
            start = end

        if pieces is None:
            output.append(vocab.unk_token)
        else:
            output.extend(pieces)
    return output


def encode_sequence(tokens: List[str], vocab: Vocab, max_len: int = config.MAX_LEN) -> TokenSequence:
    """Frame ``tokens`` as ``[CLS] ... [SEP]``, truncated and padded to exactly ``max_len`` ids."""
    if max_len < 3:
        raise ValueError("max_len must be >= 3, got {}".format(max_len))

    body = vocab.ids(tokens[:max_len - 2])
    ids = [vocab.cls_id] + body + [vocab.sep_id]
    length = len(ids)
    padded = np.full(max_len, vocab.pad_id, dtype=np.int64)
    padded[:length] = ids
    mask = np.zeros(max_len, dtype=np.int64)
    mask[:length] = 1
    return TokenSequence(ids=padded, attention_mask=mask, original_length=length)


class HeadlineEncoder:
    """Turns raw headline text into a ``TokenSequence``: normalize, drop stopwords, tokenize, encode.

    Args:
        vocab: The WordPiece vocabulary of the encoder.
        stopwords: Words removed before tokenization, or None to keep every word.
        max_len: Fixed sequence length.
        split_punct: Split punctuation off words before WordPiece.
    """

    def __init__(self, vocab: Vocab, stopwords: Optional[AbstractSet[str]] = None, max_len: int = config.MAX_LEN,
                 split_punct: bool = True):
        self.vocab = vocab
        self.stopwords = stopwords
        self.max_len = max_len
        self.split_punct = split_punct
        self.logger = logging.getLogger(__name__ + "." + self.__class__.__name__)

    def tokens(self, title: str) -> List[str]:
        text = normalize_text(title)
        if self.stopwords:
            text = remove_stopwords(text, self.stopwords)
        return wordpiece_tokenize(text, self.vocab, split_punct=self.split_punct)

    def encode(self, title: str) -> TokenSequence:
        tokens = self.tokens(title)
        if len(tokens) > self.max_len - 2:
            self.logger.debug("Truncated {} tokens to {}.".format(len(tokens), self.max_len - 2))
        return encode_sequence(tokens, self.vocab, self.max_len)

    def encode_all(self, titles: List[str]) -> List[TokenSequence]:
        return [self.encode(title) for title in titles]
