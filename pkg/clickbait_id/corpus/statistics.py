import re
from collections import Counter
from typing import AbstractSet, Dict, Iterable, List, Mapping, NamedTuple, Optional, Tuple

import pandas as pd

from clickbait_id.corpus.records import Label, LabeledDataset

__all__ = ['WordTally', 'count_words', 'word_frequencies', 'top_k_words', 'frequency_frame']

# Runs of letters and digits.
_WORD = re.compile(r'[^\W_]+', re.UNICODE)


class WordTally(NamedTuple):
    counts: Counter
    stopword_hits: int
    punctuation_tokens: int
    total_tokens: int


def count_words(titles: Iterable[str], stopwords: Optional[AbstractSet[str]] = None,
                lowercase: bool = True) -> WordTally:
    """Bag-of-words counts over ``titles``.

    Titles are split on whitespace and each token is split further into its runs of letters and digits, so
    ``Jokowi-Prabowo`` yields two words. A token with no such run is one punctuation-only token; words in
    ``stopwords`` (compared lowercased) are stopword hits. The total counts every word plus every punctuation-only
    token, so each falls into exactly one of counted words, stopword hits or punctuation-only tokens.
    """
    counts = Counter()
    stopword_hits = punctuation = total = 0
    for title in titles:
        for token in title.split():
            words = _WORD.findall(token)
            if not words:
                total += 1
                punctuation += 1
                continue
            for word in words:
                total += 1
                if lowercase:
                    word = word.lower()
                if stopwords is not None and word.lower() in stopwords:
                    stopword_hits += 1
                    continue
                counts[word] += 1
    return WordTally(counts, stopword_hits, punctuation, total)


def word_frequencies(dataset: LabeledDataset, label: Label, stopwords: Optional[AbstractSet[str]] = None,
                     lowercase: bool = True) -> Counter:
    titles = [r.title for r in dataset.records if r.final_label is label]
    return count_words(titles, stopwords=stopwords, lowercase=lowercase).counts


def top_k_words(frequencies: Mapping[str, int], k: int) -> List[Tuple[str, int]]:
    """Most frequent words, by descending count and then alphabetically."""
    if k < 1:
        raise ValueError("k must be >= 1, got {}".format(k))
    return sorted(frequencies.items(), key=lambda item: (-item[1], item[0]))[:k]


def frequency_frame(frequencies: Dict[Label, Mapping[str, int]]) -> pd.DataFrame:
    """Frequency report rows ``word,count,class``, each class sorted like ``top_k_words``."""
    rows = []
    for label, counts in frequencies.items():
        for word, count in top_k_words(counts, max(len(counts), 1)):
            rows.append({'word': word, 'count': count, 'class': label.value})
    return pd.DataFrame(rows, columns=['word', 'count', 'class'])
