import logging
import os
from dataclasses import dataclass
from typing import Dict, List

from clickbait_id.exceptions import DataError

__all__ = ['Vocab', 'load_vocab', 'SPECIAL_TOKENS']

logger = logging.getLogger(__name__)

PAD, UNK, CLS, SEP = '[PAD]', '[UNK]', '[CLS]', '[SEP]'
SPECIAL_TOKENS = (PAD, UNK, CLS, SEP)


@dataclass(frozen=True)
class Vocab:
    """WordPiece vocabulary; immutable once loaded so it can be shared between threads."""
    token_to_id: Dict[str, int]
    id_to_token: List[str]
    pad_id: int
    unk_id: int
    cls_id: int
    sep_id: int
    continuation_prefix: str = '##'

    def __len__(self):
        return len(self.id_to_token)

    def __contains__(self, token: str) -> bool:
        return token in self.token_to_id

    @property
    def unk_token(self) -> str:
        return self.id_to_token[self.unk_id]

    def ids(self, tokens: List[str]) -> List[int]:
        return [self.token_to_id.get(t, self.unk_id) for t in tokens]


def load_vocab(path: str, continuation_prefix: str = '##') -> Vocab:
    """Load a vocabulary file with one token per line; the 0-based line number is the token id.

    Raises:
        DataError: on a duplicate token (naming both lines) or a missing special token.
    """
    if not os.path.exists(path):
        raise DataError("Vocab file '{}' does not exist".format(path))

    token_to_id = {}
    id_to_token = []
    with open(path, 'r', encoding='utf-8') as f:
        lines = f.read().splitlines()
    for index, token in enumerate(lines):
        if token in token_to_id:
            raise DataError("Duplicate token '{}' in '{}' on lines {} and {}".format(
                token, path, token_to_id[token] + 1, index + 1))
        token_to_id[token] = index
        id_to_token.append(token)

    for special in SPECIAL_TOKENS:
        if special not in token_to_id:
            raise DataError("Vocab file '{}' is missing special token '{}'".format(path, special))

    logger.info("Loaded vocabulary of {} tokens from '{}'.".format(len(id_to_token), path))
    return Vocab(token_to_id=token_to_id, id_to_token=id_to_token,
                 pad_id=token_to_id[PAD], unk_id=token_to_id[UNK], cls_id=token_to_id[CLS], sep_id=token_to_id[SEP],
                 continuation_prefix=continuation_prefix)
