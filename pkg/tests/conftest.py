import json
import os

import numpy as np
import pytest

from clickbait_id.corpus import HeadlineRecord, Label, LabeledDataset
from clickbait_id.preprocess import load_vocab

TOY_VOCAB = ['[PAD]', '[UNK]', '[CLS]', '[SEP]', 'ini', 'bikin', 'heboh', '##nya']

CLICKBAIT_WORDS = ['heboh', 'viral', 'bikin', 'terungkap', 'ternyata', 'wow', 'rahasia', 'mengejutkan']
NEWS_WORDS = ['rapat', 'anggaran', 'presiden', 'menteri', 'laporan', 'ekonomi', 'pemerintah', 'resmi']
FILLER_WORDS = ['kota', 'warga', 'hari', 'baru', 'besar', 'jalan', 'gempa', 'kpk']
SYNTHETIC_VOCAB = ['[PAD]', '[UNK]', '[CLS]', '[SEP]'] + CLICKBAIT_WORDS + NEWS_WORDS + FILLER_WORDS


def write_lines(path, lines):
    with open(path, 'w', encoding='utf-8') as f:
        f.write('\n'.join(lines) + '\n')
    return str(path)


def make_record(index: int, title: str, label: Label, n_raters: int = 3) -> HeadlineRecord:
    return HeadlineRecord(id='h{:05d}'.format(index), title=title, rater_labels=(label,) * n_raters,
                          final_label=label)


def make_dataset(n_clickbait: int, n_non_clickbait: int) -> LabeledDataset:
    records = [make_record(i, 'judul {}'.format(i), Label.CLICKBAIT) for i in range(n_clickbait)]
    records += [make_record(n_clickbait + i, 'judul {}'.format(n_clickbait + i), Label.NON_CLICKBAIT)
                for i in range(n_non_clickbait)]
    return LabeledDataset(records=records, provenance='test')


def synthetic_titles(n: int, seed: int = 0):
    """Headlines with class-correlated words: three from the class list and two shared fillers each."""
    rng = np.random.default_rng(seed)
    rows = []
    for i in range(n):
        label = Label.CLICKBAIT if i % 2 == 0 else Label.NON_CLICKBAIT
        words = CLICKBAIT_WORDS if label is Label.CLICKBAIT else NEWS_WORDS
        tokens = list(rng.choice(words, size=3)) + list(rng.choice(FILLER_WORDS, size=2))
        rng.shuffle(tokens)
        rows.append(('s{:05d}'.format(i), ' '.join(tokens), label))
    return rows


def synthetic_dataset(n: int = 1000, seed: int = 0) -> LabeledDataset:
    records = [HeadlineRecord(id=i, title=t, rater_labels=(label,) * 3, final_label=label)
               for i, t, label in synthetic_titles(n, seed)]
    return LabeledDataset(records=records, provenance='synthetic')


@pytest.fixture
def toy_vocab(tmp_path_factory):
    return load_vocab(write_lines(tmp_path_factory.mktemp('vocab') / 'toy_vocab.txt', TOY_VOCAB))


@pytest.fixture
def synthetic_vocab_path(tmp_path):
    return write_lines(tmp_path / 'vocab.txt', SYNTHETIC_VOCAB)


@pytest.fixture
def synthetic_vocab(synthetic_vocab_path):
    return load_vocab(synthetic_vocab_path)


@pytest.fixture
def clickid_json(tmp_path):
    """A clickid-json export of 400 synthetic headlines; every fifth one has a 2-1 rater split."""
    lines = []
    for index, (record_id, title, label) in enumerate(synthetic_titles(400, seed=7)):
        score = 2 if index % 5 == 0 else 3
        lines.append(json.dumps({'id': record_id, 'title': title, 'label': label.value, 'label_score': score}))
    return write_lines(tmp_path / 'train.jsonl', lines)


@pytest.fixture
def holdout_csv(tmp_path):
    lines = ['id,title,label']
    for record_id, title, label in synthetic_titles(60, seed=11):
        lines.append('{},{},{}'.format(record_id, title, label.value))
    return write_lines(tmp_path / 'holdout.csv', lines)


def embedding_model(path, vocab_size: int, width: int, seed: int = 0, output_rank: int = 3, token_types: bool = False):
    """Tiny ONNX 'encoder': an embedding lookup multiplied by the attention mask.

    With ``token_types`` the graph takes a third ``token_type_ids`` input that is added to the mask, so only all-zero
    token types leave the output unchanged.
    """
    onnx = pytest.importorskip('onnx')
    from onnx import TensorProto, helper, numpy_helper

    rng = np.random.default_rng(seed)
    table = numpy_helper.from_array(rng.standard_normal((vocab_size, width)).astype(np.float32), name='table')
    axes = numpy_helper.from_array(np.array([2], dtype=np.int64), name='axes')
    nodes = [
        helper.make_node('Gather', ['table', 'input_ids'], ['gathered']),
        helper.make_node('Cast', ['attention_mask'], ['mask_float'], to=TensorProto.FLOAT),
        helper.make_node('Unsqueeze', ['mask_float', 'axes'], ['mask_3d']),
        helper.make_node('Mul', ['gathered', 'mask_3d'], ['hidden']),
    ]
    inputs = [helper.make_tensor_value_info('input_ids', TensorProto.INT64, ['batch', 'length']),
              helper.make_tensor_value_info('attention_mask', TensorProto.INT64, ['batch', 'length'])]
    if token_types:
        nodes[1:2] = [helper.make_node('Cast', ['attention_mask'], ['mask_only'], to=TensorProto.FLOAT),
                      helper.make_node('Cast', ['token_type_ids'], ['types_float'], to=TensorProto.FLOAT),
                      helper.make_node('Add', ['mask_only', 'types_float'], ['mask_float'])]
        inputs.append(helper.make_tensor_value_info('token_type_ids', TensorProto.INT64, ['batch', 'length']))
    initializers = [table, axes]
    if output_rank == 3:
        output = helper.make_tensor_value_info('hidden', TensorProto.FLOAT, ['batch', 'length', width])
    else:
        axes_sum = numpy_helper.from_array(np.array([2], dtype=np.int64), name='axes_sum')
        nodes.append(helper.make_node('ReduceSum', ['hidden', 'axes_sum'], ['summed'], keepdims=0))
        initializers.append(axes_sum)
        output = helper.make_tensor_value_info('summed', TensorProto.FLOAT, ['batch', 'length'])

    graph = helper.make_graph(nodes, 'toy_encoder', inputs, [output], initializer=initializers)
    model = helper.make_model(graph, opset_imports=[helper.make_opsetid('', 13)])
    model.ir_version = 7
    onnx.save(model, str(path))
    return str(path)


@pytest.fixture
def onnx_model_path(tmp_path):
    return embedding_model(tmp_path / 'encoder.onnx', vocab_size=len(TOY_VOCAB), width=6)


def listing(directory):
    return sorted(name for name in os.listdir(directory))
