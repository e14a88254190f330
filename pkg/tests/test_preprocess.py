import unicodedata

import numpy as np
import pytest

from clickbait_id.exceptions import DataError
from clickbait_id.preprocess import HeadlineEncoder, encode_sequence, load_stopwords, load_vocab, normalize_text, \
    remove_stopwords, split_punctuation, wordpiece_tokenize

from conftest import TOY_VOCAB, write_lines


def oracle_tokenize(text, vocab_tokens, prefix='##'):
    """Brute-force greedy segmentation: at each position scan every end and keep the longest match."""
    out = []
    for word in text.split():
        pieces, start = [], 0
        while start < len(word):
            matches = [end for end in range(start + 1, len(word) + 1)
                       if (word[start:end] if start == 0 else prefix + word[start:end]) in vocab_tokens]
            if not matches:
                pieces = None
                break
            end = max(matches)
            pieces.append(word[start:end] if start == 0 else prefix + word[start:end])
            start = end
        out.extend(['[UNK]'] if pieces is None else pieces)
    return out


class TestNormalizeText:
    def test_trims_and_collapses(self):
        assert normalize_text('  Heboh!!  ') == 'Heboh!!'
        assert normalize_text('a \t b\n c') == 'a b c'

    def test_empty(self):
        assert normalize_text('') == ''

    def test_nfc(self):
        decomposed = 'Cafe\u0301'
        assert normalize_text(decomposed) == unicodedata.normalize('NFC', decomposed)
        assert normalize_text(decomposed) == 'Caf\u00e9'

    def test_case_preserved(self):
        assert normalize_text('KPK Periksa') == 'KPK Periksa'


class TestStopwords:
    def test_remove(self):
        assert remove_stopwords('apa yang terjadi di sini', {'yang', 'di'}) == 'apa terjadi sini'

    def test_bundled_list_fixture(self):
        stopwords = load_stopwords()
        assert {'yang', 'di'} <= stopwords
        assert not {'apa', 'terjadi', 'sini'} & stopwords

    def test_case_insensitive_and_punctuation_kept(self):
        assert remove_stopwords('Yang heboh, DI sini!', {'yang', 'di'}) == 'heboh, sini!'

    def test_no_stopwords_unchanged(self):
        assert remove_stopwords('bikin heboh', {'yang'}) == 'bikin heboh'

    def test_only_stopwords(self):
        assert remove_stopwords('yang di', {'yang', 'di'}) == ''

    def test_idempotent(self):
        stopwords = load_stopwords()
        text = 'Ini yang bikin heboh dan viral di kota'
        once = remove_stopwords(text, stopwords)
        assert remove_stopwords(once, stopwords) == once

    def test_custom_file_is_lowercased(self, tmp_path):
        path = write_lines(tmp_path / 'stop.txt', ['Yang', '', 'DI'])
        assert load_stopwords(path) == frozenset({'yang', 'di'})

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError):
            load_stopwords(str(tmp_path / 'missing.txt'))

    def test_sastrawi_list(self):
        pytest.importorskip('Sastrawi')
        stopwords = load_stopwords('sastrawi')
        assert 'yang' in stopwords and 'heboh' not in stopwords
        assert all(w == w.lower() for w in stopwords)


class TestVocab:
    def test_toy_vocab_ids(self, toy_vocab):
        assert toy_vocab.pad_id == 0
        assert toy_vocab.cls_id == 2
        assert toy_vocab.token_to_id['heboh'] == 6
        assert len(toy_vocab) == 8

    def test_missing_special(self, tmp_path):
        path = write_lines(tmp_path / 'v.txt', [t for t in TOY_VOCAB if t != '[SEP]'])
        with pytest.raises(DataError, match=r'\[SEP\]'):
            load_vocab(path)

    def test_duplicate_names_both_lines(self, tmp_path):
        path = write_lines(tmp_path / 'v.txt', TOY_VOCAB + ['ini'])
        with pytest.raises(DataError, match='lines 5 and 9'):
            load_vocab(path)


class TestWordpiece:
    def test_whole_words(self, toy_vocab):
        assert wordpiece_tokenize('bikin heboh', toy_vocab) == ['bikin', 'heboh']

    def test_continuation(self, toy_vocab):
        assert wordpiece_tokenize('ininya', toy_vocab) == ['ini', '##nya']

    def test_unknown_word(self, toy_vocab):
        assert wordpiece_tokenize('zzz', toy_vocab) == ['[UNK]']

    def test_partial_segmentation_is_unknown(self, toy_vocab):
        assert wordpiece_tokenize('inix', toy_vocab) == ['[UNK]']

    def test_long_word_still_segments(self, toy_vocab):
        word = 'ini' + 'nya' * 50
        assert wordpiece_tokenize(word, toy_vocab) == ['ini'] + ['##nya'] * 50
        assert wordpiece_tokenize(word, toy_vocab, max_input_chars_per_word=100) == ['[UNK]']

    def test_punctuation_split(self, toy_vocab):
        assert split_punctuation('heboh!') == 'heboh ! '
        assert wordpiece_tokenize('heboh!', toy_vocab, split_punct=True) == ['heboh', '[UNK]']

    def test_matches_brute_force_oracle(self, tmp_path):
        rng = np.random.default_rng(2024)
        alphabet = list('abcde')
        for case in range(500):
            pieces = set()
            for _ in range(int(rng.integers(1, 47))):
                piece = ''.join(rng.choice(alphabet, size=int(rng.integers(1, 4))))
                pieces.add('##' + piece if rng.random() < 0.4 else piece)
            tokens = ['[PAD]', '[UNK]', '[CLS]', '[SEP]'] + sorted(pieces)
            vocab = load_vocab(write_lines(tmp_path / 'v{}.txt'.format(case), tokens))
            text = ' '.join(''.join(rng.choice(alphabet, size=int(rng.integers(1, 8))))
                            for _ in range(int(rng.integers(1, 5))))
            assert wordpiece_tokenize(text, vocab) == oracle_tokenize(text, set(tokens)), (text, tokens)

    def test_pieces_reassemble_words(self, tmp_path):
        rng = np.random.default_rng(5)
        alphabet = list('abcde')
        tokens = ['[PAD]', '[UNK]', '[CLS]', '[SEP]'] + list(alphabet) + ['##' + c for c in alphabet] + ['ab', '##cd']
        vocab = load_vocab(write_lines(tmp_path / 'v.txt', tokens))
        for _ in range(100):
            word = ''.join(rng.choice(alphabet, size=int(rng.integers(1, 10))))
            pieces = wordpiece_tokenize(word, vocab)
            assert ''.join(p[2:] if p.startswith('##') else p for p in pieces) == word


class TestEncodeSequence:
    def test_framing_and_padding(self, toy_vocab):
        seq = encode_sequence(['ini', 'heboh'], toy_vocab, max_len=6)
        assert seq.ids.tolist() == [2, 4, 6, 3, 0, 0]
        assert seq.attention_mask.tolist() == [1, 1, 1, 1, 0, 0]
        assert seq.original_length == 4

    def test_empty_tokens(self, toy_vocab):
        seq = encode_sequence([], toy_vocab, max_len=4)
        assert seq.ids.tolist() == [2, 3, 0, 0]
        assert seq.attention_mask.tolist() == [1, 1, 0, 0]

    def test_truncation(self, toy_vocab):
        seq = encode_sequence(['ini'] * 10, toy_vocab, max_len=6)
        assert seq.ids.tolist() == [2, 4, 4, 4, 4, 3]
        assert seq.ids[5] == toy_vocab.sep_id
        assert seq.original_length == 6

    def test_unknown_tokens_map_to_unk(self, toy_vocab):
        assert encode_sequence(['nope'], toy_vocab, max_len=4).ids.tolist() == [2, 1, 3, 0]

    def test_length_and_mask_popcount(self, toy_vocab):
        rng = np.random.default_rng(1)
        for _ in range(50):
            max_len = int(rng.integers(3, 12))
            tokens = list(rng.choice(TOY_VOCAB[4:], size=int(rng.integers(0, 15))))
            seq = encode_sequence(tokens, toy_vocab, max_len)
            assert len(seq.ids) == len(seq.attention_mask) == max_len
            assert int(seq.attention_mask.sum()) == seq.original_length
            assert ((seq.ids != toy_vocab.pad_id) == (seq.attention_mask == 1)).all()

    def test_max_len_too_small(self, toy_vocab):
        with pytest.raises(ValueError):
            encode_sequence(['ini'], toy_vocab, max_len=2)


class TestHeadlineEncoder:
    def test_pipeline(self, toy_vocab):
        encoder = HeadlineEncoder(toy_vocab, stopwords={'yang'}, max_len=8)
        assert encoder.tokens('  Ininya yang  bikin heboh! ') == ['[UNK]', 'bikin', 'heboh', '[UNK]']
        seq = encoder.encode('ininya yang bikin heboh')
        assert seq.ids.tolist() == [2, 4, 7, 5, 6, 3, 0, 0]

    def test_encode_all_preserves_order(self, toy_vocab):
        encoder = HeadlineEncoder(toy_vocab, max_len=5)
        sequences = encoder.encode_all(['heboh', 'bikin'])
        assert [s.ids[1] for s in sequences] == [6, 5]
