"""Gradient-boosted regression trees on logistic loss over sparse features.

Each round fits one depth-limited tree to the current gradients ``g = p - y`` and hessians ``h = p (1 - p)``. A node
is split on the feature/threshold pair with the largest second-order gain

    0.5 * (G_L^2 / H_L + G_R^2 / H_R - G^2 / H)

and a leaf predicts ``-G / H``. Rows go left iff ``x <= threshold``; thresholds are midpoints between consecutive
distinct values of a feature within the node, implicit zeros included. Ties keep the first candidate in (feature,
value) order, so training is deterministic for a fixed input.
"""
import io
import logging
import zipfile
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.special import expit
from tqdm import tqdm

from clickbait_id import config
from clickbait_id.exceptions import ParamsFormatError
from clickbait_id.utils import atomic_write_bytes

__all__ = ['GbtConfig', 'RegressionTree', 'GbtModel', 'gbt_train', 'gbt_predict', 'logistic_loss', 'save_gbt',
           'load_gbt']

logger = logging.getLogger(__name__)

GBT_MAGIC = 'clickbait-id/gbt'
GBT_VERSION = 1
_LEAF = -1


@dataclass(frozen=True)
class GbtConfig:
    rounds: int = 200
    max_depth: int = 4
    shrinkage: float = 0.1
    min_gain: float = 0.0
    base_score: float = 0.0

    def __post_init__(self):
        if self.rounds < 0:
            raise ValueError("rounds must be >= 0, got {}".format(self.rounds))
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1, got {}".format(self.max_depth))
        if not 0.0 < self.shrinkage <= 1.0:
            raise ValueError("shrinkage must lie in (0, 1], got {}".format(self.shrinkage))
        if self.min_gain < 0.0:
            raise ValueError("min_gain must be >= 0, got {}".format(self.min_gain))


@dataclass
class RegressionTree:
    """Flat binary tree in pre-order. Leaves have ``feature == -1``; inner nodes only use ``threshold``/children."""
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    @property
    def depth(self) -> int:
        def _depth(node):
            if self.feature[node] == _LEAF:
                return 0
            return 1 + max(_depth(self.left[node]), _depth(self.right[node]))
        return _depth(0)

    def predict(self, columns: '_Columns') -> np.ndarray:
        """Leaf value reached by every row."""
        out = np.zeros(columns.n_rows)
        stack = [(0, np.arange(columns.n_rows))]
        while stack:
            node, rows = stack.pop()
            if len(rows) == 0:
                continue
            if self.feature[node] == _LEAF:
                out[rows] = self.value[node]
                continue
            go_left = columns.dense(self.feature[node])[rows] <= self.threshold[node]
            stack.append((self.left[node], rows[go_left]))
            stack.append((self.right[node], rows[~go_left]))
        return out


@dataclass
class GbtModel:
    trees: List[RegressionTree]
    shrinkage: float
    base_score: float
    n_features: int
    history: List[float] = field(default_factory=list)

    def raw_score(self, X) -> np.ndarray:
        columns = _Columns(_as_csr(X, self.n_features))
        score = np.full(columns.n_rows, self.base_score, dtype=np.float64)
        if self.trees:
            score += self.shrinkage * np.sum([tree.predict(columns) for tree in self.trees], axis=0)
        return score


class _Columns:
    """Column access to a CSC matrix with explicit zeros removed."""

    def __init__(self, X: sp.csr_matrix):
        self.csc = sp.csc_matrix(X, dtype=np.float64)
        self.csc.eliminate_zeros()
        self.csc.sort_indices()
        self.n_rows, self.n_cols = self.csc.shape
        self.entry_col = np.repeat(np.arange(self.n_cols), np.diff(self.csc.indptr))

    def dense(self, feature: int) -> np.ndarray:
        start, stop = self.csc.indptr[feature], self.csc.indptr[feature + 1]
        column = np.zeros(self.n_rows)
        column[self.csc.indices[start:stop]] = self.csc.data[start:stop]
        return column


def _as_csr(X, n_features: Optional[int] = None) -> sp.csr_matrix:
    X = sp.csr_matrix(X, dtype=np.float64)
    if n_features is not None and X.shape[1] != n_features:
        raise ValueError("Feature matrix has {} column(s), model expects {}".format(X.shape[1], n_features))
    if not np.isfinite(X.data).all():
        raise ValueError("Feature matrix contains non-finite values")
    return X


def logistic_loss(y: np.ndarray, raw: np.ndarray) -> float:
    """Mean logistic loss of raw logits ``raw`` against 0/1 targets."""
    return float(np.mean(np.logaddexp(0.0, raw) - y * raw))


class _TreeBuilder:
    def __init__(self, columns: _Columns, g: np.ndarray, h: np.ndarray, max_depth: int, min_gain: float):
        self.columns = columns
        self.g = g
        self.h = h
        self.max_depth = max_depth
        self.min_gain = min_gain
        self.nodes = []

    def best_split(self, rows: np.ndarray) -> Optional[Tuple[int, float, float]]:
        """(feature, threshold, gain) of the best split of ``rows``, or None when no split has positive gain."""
        cols = self.columns
        in_node = np.zeros(cols.n_rows, dtype=bool)
        in_node[rows] = True
        G, H = self.g[rows].sum(), self.h[rows].sum()

        sel = in_node[cols.csc.indices]
        e_row = cols.csc.indices[sel]
        e_col = cols.entry_col[sel]
        e_val = cols.csc.data[sel]
        e_g, e_h = self.g[e_row], self.h[e_row]

        # One pseudo-entry per column for the rows whose value is an implicit zero.
        nnz = np.bincount(e_col, minlength=cols.n_cols)
        g_nz = np.bincount(e_col, weights=e_g, minlength=cols.n_cols)
        h_nz = np.bincount(e_col, weights=e_h, minlength=cols.n_cols)
        zero_cols = np.flatnonzero(nnz < len(rows))

        all_col = np.concatenate([e_col, zero_cols])
        all_val = np.concatenate([e_val, np.zeros(len(zero_cols))])
        all_g = np.concatenate([e_g, G - g_nz[zero_cols]])
        all_h = np.concatenate([e_h, H - h_nz[zero_cols]])
        if len(all_col) < 2:
            return None

        order = np.lexsort((all_val, all_col))
        all_col, all_val, all_g, all_h = all_col[order], all_val[order], all_g[order], all_h[order]

        # Group equal (feature, value) pairs.
        first = np.ones(len(all_col), dtype=bool)
        first[1:] = (all_col[1:] != all_col[:-1]) | (all_val[1:] != all_val[:-1])
        group = np.cumsum(first) - 1
        grp_col, grp_val = all_col[first], all_val[first]
        grp_g = np.bincount(group, weights=all_g)
        grp_h = np.bincount(group, weights=all_h)

        col_start = np.ones(len(grp_col), dtype=bool)
        col_start[1:] = grp_col[1:] != grp_col[:-1]
        start_index = np.flatnonzero(col_start)[np.cumsum(col_start) - 1]
        cum_g, cum_h = np.cumsum(grp_g), np.cumsum(grp_h)
        left_g = cum_g - (cum_g - grp_g)[start_index]
        left_h = cum_h - (cum_h - grp_h)[start_index]
        right_g, right_h = G - left_g, H - left_h

        valid = np.zeros(len(grp_col), dtype=bool)
        valid[:-1] = ~col_start[1:]
        valid &= (left_h > 0) & (right_h > 0)
        if not valid.any() or H <= 0:
            return None

        gain = np.full(len(grp_col), -np.inf)
        gain[valid] = 0.5 * (left_g[valid] ** 2 / left_h[valid] + right_g[valid] ** 2 / right_h[valid] - G ** 2 / H)
        best = int(np.argmax(gain))
        if not gain[best] > self.min_gain:
            return None
        return int(grp_col[best]), 0.5 * (grp_val[best] + grp_val[best + 1]), float(gain[best])

    def _leaf(self, rows: np.ndarray) -> int:
        H = self.h[rows].sum()
        value = -self.g[rows].sum() / H if H > 0 else 0.0
        self.nodes.append([_LEAF, 0.0, _LEAF, _LEAF, value])
        return len(self.nodes) - 1

    def grow(self, rows: np.ndarray, depth: int = 0) -> int:
        split = self.best_split(rows) if depth < self.max_depth else None
        if split is None:
            return self._leaf(rows)

        feature, threshold, gain = split
        node = len(self.nodes)
        self.nodes.append([feature, threshold, _LEAF, _LEAF, 0.0])
        go_left = self.columns.dense(feature)[rows] <= threshold
        self.nodes[node][2] = self.grow(rows[go_left], depth + 1)
        self.nodes[node][3] = self.grow(rows[~go_left], depth + 1)
        return node

    def build(self) -> Optional[RegressionTree]:
        root_split = self.best_split(np.arange(self.columns.n_rows))
        if root_split is None:
            return None
        self.grow(np.arange(self.columns.n_rows))
        feature, threshold, left, right, value = zip(*self.nodes)
        return RegressionTree(feature=np.array(feature, dtype=np.int64), threshold=np.array(threshold),
                              left=np.array(left, dtype=np.int64), right=np.array(right, dtype=np.int64),
                              value=np.array(value, dtype=np.float64))


def gbt_train(X, y, gbt_config: GbtConfig = GbtConfig(), progress: bool = False) -> GbtModel:
    """Boost ``gbt_config.rounds`` trees on logistic loss.

    Boosting stops early when the root cannot be split, since later rounds would see the same features; a model
    trained on identical rows is therefore the constant ``base_score`` model.

    Args:
        X: ``n x V`` feature matrix, sparse or dense.
        y: 0/1 targets, both classes present.
        gbt_config: Rounds, depth, shrinkage, minimum gain and base score.
        progress: Show a progress bar over rounds.
    """
    X = _as_csr(X)
    y = np.asarray(y, dtype=np.float64)
    if X.shape[0] != len(y):
        raise ValueError("Feature matrix has {} row(s) but there are {} label(s)".format(X.shape[0], len(y)))
    if not np.isin(y, (0.0, 1.0)).all():
        raise ValueError("Labels must be 0 or 1")
    if len(np.unique(y)) < 2:
        raise ValueError("Boosting needs both classes in the training data")

    columns = _Columns(X)
    raw = np.full(len(y), gbt_config.base_score, dtype=np.float64)
    model = GbtModel(trees=[], shrinkage=gbt_config.shrinkage, base_score=gbt_config.base_score,
                     n_features=X.shape[1], history=[logistic_loss(y, raw)])

    for round_index in tqdm(range(gbt_config.rounds), desc='Boosting', disable=not progress,
                            bar_format=config.IGNITE_BAR_FORMAT):
        p = expit(raw)
        builder = _TreeBuilder(columns, g=p - y, h=p * (1.0 - p), max_depth=gbt_config.max_depth,
                               min_gain=gbt_config.min_gain)
        tree = builder.build()
        if tree is None:
            logger.info("No split with positive gain in round {}; stopping with {} tree(s).".format(
                round_index, len(model.trees)))
            break
        model.trees.append(tree)
        raw += gbt_config.shrinkage * tree.predict(columns)
        model.history.append(logistic_loss(y, raw))

    logger.debug("Boosted {} tree(s); training loss {:.6f} -> {:.6f}.".format(
        len(model.trees), model.history[0], model.history[-1]))
    return model


def gbt_predict(model: GbtModel, X) -> np.ndarray:
    """Clickbait probabilities ``sigmoid(base_score + shrinkage * sum of leaf values)``."""
    if not sp.issparse(X) and len(X) == 0:
        return np.zeros(0)
    X = _as_csr(X, model.n_features)
    if X.shape[0] == 0:
        return np.zeros(0)
    return expit(model.raw_score(X))


def save_gbt(model: GbtModel, path: str):
    sizes = np.array([tree.n_nodes for tree in model.trees], dtype='<i8')

    def _concat(attr, dtype):
        if not model.trees:
            return np.zeros(0, dtype=dtype)
        return np.concatenate([getattr(tree, attr) for tree in model.trees]).astype(dtype)

    buffer = io.BytesIO()
    np.savez(buffer, magic=np.array(GBT_MAGIC), version=np.array(GBT_VERSION),
             shrinkage=np.array(model.shrinkage, dtype='<f8'), base_score=np.array(model.base_score, dtype='<f8'),
             n_features=np.array(model.n_features, dtype='<i8'), sizes=sizes,
             feature=_concat('feature', '<i8'), threshold=_concat('threshold', '<f8'), left=_concat('left', '<i8'),
             right=_concat('right', '<i8'), value=_concat('value', '<f8'),
             history=np.asarray(model.history, dtype='<f8'))
    atomic_write_bytes(path, buffer.getvalue())


def load_gbt(path: str) -> GbtModel:
    try:
        with np.load(path, allow_pickle=False) as archive:
            fields = {key: archive[key] for key in archive.files}
    except (OSError, ValueError, zipfile.BadZipFile) as e:
        raise ParamsFormatError("Cannot read boosted model '{}': {}".format(path, e))

    if str(fields.get('magic')) != GBT_MAGIC:
        raise ParamsFormatError("'{}' is not a boosted model file".format(path))
    if int(fields['version']) != GBT_VERSION:
        raise ParamsFormatError("Boosted model '{}' has version {}, expected {}".format(
            path, int(fields['version']), GBT_VERSION))

    sizes = fields['sizes']
    total = int(sizes.sum())
    if any(len(fields[key]) != total for key in ('feature', 'threshold', 'left', 'right', 'value')):
        raise ParamsFormatError("Boosted model '{}' has inconsistent tree arrays".format(path))

    trees = []
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    for start, stop in zip(offsets[:-1], offsets[1:]):
        trees.append(RegressionTree(**{key: fields[key][start:stop].copy()
                                       for key in ('feature', 'threshold', 'left', 'right', 'value')}))
    return GbtModel(trees=trees, shrinkage=float(fields['shrinkage']), base_score=float(fields['base_score']),
                    n_features=int(fields['n_features']), history=fields['history'].tolist())
