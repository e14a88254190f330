import logging
from abc import ABC, abstractmethod
from typing import AbstractSet, Dict, List, Optional, Sequence, Tuple

import numpy as np

from clickbait_id.baseline import GbtConfig, GbtModel, TfidfModel, gbt_predict, gbt_train, tfidf_fit, \
    tfidf_transform
from clickbait_id.corpus.records import Label, LabeledDataset
from clickbait_id.embed import EmbeddingBackend, cached_embed, embed_batch
from clickbait_id.nn import HeadParams, forward, masked_mean_pool
from clickbait_id.preprocess import HeadlineEncoder, normalize_text, remove_stopwords
from clickbait_id.trainers import EpochLog, TrainConfig, train

__all__ = ['ClassifierPipeline', 'HeadPipeline', 'TfidfGbtPipeline']

# Headlines embedded per backend call when pooling; bounds the L x H buffers held at once.
POOL_CHUNK = 256


class ClassifierPipeline(ABC):
    """Text in, clickbait probability out.

    ``fit`` replaces any previously trained state, so one instance can be refit on every cross-validation fold.
    """

    name = 'pipeline'

    def __init__(self, threshold: float = 0.5):
        self.threshold = threshold
        self.logger = logging.getLogger(__name__ + "." + self.__class__.__name__)

    @abstractmethod
    def fit(self, dataset: LabeledDataset):
        pass

    @abstractmethod
    def score(self, titles: Sequence[str]) -> np.ndarray:
        """Clickbait probability per title."""
        pass

    def predict(self, titles: Sequence[str]) -> List[Tuple[float, Label]]:
        return [(float(s), Label.CLICKBAIT if s >= self.threshold else Label.NON_CLICKBAIT)
                for s in self.score(titles)]


class HeadPipeline(ClassifierPipeline):
    """Encoder pipeline: tokenize, embed with a frozen backend, mean-pool, classify with the trained head.

    Pooled vectors are memoized per title, so refitting on another fold never embeds a headline twice. Without a
    cache directory the vectors are rounded to float32 like cached ones, so results do not depend on the cache.

    Args:
        encoder: Text to ``TokenSequence``.
        backend: Embedding backend.
        train_config: Head training settings.
        cache_dir: On-disk embedding cache, or None.
        params: Already trained head, e.g. loaded from a params file.
        progress: Show training progress bars.
        tensorboard_dir: TensorBoard log directory for training, or None.
    """

    name = 'mbert-head'

    def __init__(self, encoder: HeadlineEncoder, backend: EmbeddingBackend, train_config: TrainConfig = TrainConfig(),
                 cache_dir: Optional[str] = None, params: Optional[HeadParams] = None, progress: bool = False,
                 tensorboard_dir: Optional[str] = None):
        super().__init__(threshold=train_config.threshold)
        self.encoder = encoder
        self.backend = backend
        self.train_config = train_config
        self.cache_dir = cache_dir
        self.params = params
        self.progress = progress
        self.tensorboard_dir = tensorboard_dir
        self.log: List[EpochLog] = []
        self._pooled: Dict[str, np.ndarray] = {}

    def pooled(self, titles: Sequence[str]) -> np.ndarray:
        """``len(titles) x H`` matrix of mean-pooled embeddings."""
        missing = list(dict.fromkeys(t for t in titles if t not in self._pooled))
        for start in range(0, len(missing), POOL_CHUNK):
            chunk = missing[start:start + POOL_CHUNK]
            sequences = self.encoder.encode_all(chunk)
            if self.cache_dir is not None:
                embeddings = cached_embed(self.backend, self.cache_dir, sequences)
            else:
                embeddings = embed_batch(self.backend, sequences)
            for title, emb in zip(chunk, embeddings):
                vectors = np.asarray(emb.vectors, dtype=np.float32)
                self._pooled[title] = masked_mean_pool(type(emb)(vectors=vectors, mask=emb.mask))
        if missing:
            self.logger.debug("Pooled {} new headline(s) with '{}'.".format(len(missing), self.backend.name))

        if len(titles) == 0:
            return np.zeros((0, self.backend.hidden_width))
        return np.stack([self._pooled[t] for t in titles])

    def fit(self, dataset: LabeledDataset):
        features = self.pooled(dataset.titles)
        self.params, self.log = train(list(zip(features, dataset.targets.tolist())), self.train_config,
                                      progress=self.progress, tensorboard_dir=self.tensorboard_dir)
        return self

    def score(self, titles: Sequence[str]) -> np.ndarray:
        if self.params is None:
            raise RuntimeError("HeadPipeline must be fitted or given params before scoring")
        if len(titles) == 0:
            return np.zeros(0)
        return forward(self.params, self.pooled(titles)).numpy()


class TfidfGbtPipeline(ClassifierPipeline):
    """Baseline: TF-IDF vectors of the normalized, stopword-filtered titles fed to boosted trees."""

    name = 'tfidf-gbt'

    def __init__(self, stopwords: Optional[AbstractSet[str]] = None, gbt_config: GbtConfig = GbtConfig(),
                 threshold: float = 0.5, progress: bool = False):
        super().__init__(threshold=threshold)
        self.stopwords = stopwords
        self.gbt_config = gbt_config
        self.progress = progress
        self.tfidf: Optional[TfidfModel] = None
        self.model: Optional[GbtModel] = None

    def texts(self, titles: Sequence[str]) -> List[str]:
        texts = [normalize_text(t) for t in titles]
        if self.stopwords:
            texts = [remove_stopwords(t, self.stopwords) for t in texts]
        return texts

    def fit(self, dataset: LabeledDataset):
        texts = self.texts(dataset.titles)
        self.tfidf = tfidf_fit(texts)
        self.model = gbt_train(tfidf_transform(self.tfidf, texts), dataset.targets, self.gbt_config,
                               progress=self.progress)
        self.logger.debug("Fitted {} tree(s) over {} TF-IDF term(s).".format(
            len(self.model.trees), self.tfidf.n_features))
        return self

    def score(self, titles: Sequence[str]) -> np.ndarray:
        if self.model is None:
            raise RuntimeError("TfidfGbtPipeline must be fitted before scoring")
        if len(titles) == 0:
            return np.zeros(0)
        return gbt_predict(self.model, tfidf_transform(self.tfidf, self.texts(titles)))
