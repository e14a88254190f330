import dataclasses
import json
import os
from typing import Any, Dict, Optional, Union

from clickbait_id.exceptions import ConfigError

PATH = os.path.dirname(os.path.abspath(__file__))
ROOT = os.path.join(PATH, '..')

DATA_DIR = os.path.join(PATH, 'data')
DATASETS_DIR = os.path.join(ROOT, 'datasets')
OUTPUT_DIR = os.path.join(ROOT, 'output')
CACHE_DIR = os.path.join(ROOT, 'cache', 'embeddings')
DEFAULT_STOPWORDS_PATH = os.path.join(DATA_DIR, 'stopwords_id.txt')

IGNITE_BAR_FORMAT = '{desc}[{n_fmt}/{total_fmt}] {percentage:3.0f}%|{bar}|{postfix} [{elapsed}<{remaining}]'
LOGGING_FORMAT = '[%(levelname)s] %(name)s:%(message)s'

MAX_LEN = 64
HIDDEN_UNITS = 100
EMBED_BATCH_SIZE = 32
NUM_RATERS = 3
SCHEMAS = ('clickid-json', 'clickid-csv', 'simple-csv')
COMMANDS = ('ingest', 'eda', 'train', 'crossval', 'predict', 'compare', 'evaluate-holdout')

# Paths each command reads; checked at validation time.
_REQUIRED_PATHS = {
    'ingest': ('train_path',),
    'eda': ('train_path',),
    'train': ('train_path', 'vocab_path'),
    'crossval': ('train_path', 'vocab_path'),
    'predict': ('params_path', 'predict_input', 'vocab_path'),
    'compare': ('train_path', 'vocab_path'),
    'evaluate-holdout': ('train_path', 'holdout_path', 'vocab_path'),
}


@dataclasses.dataclass
class RunConfig:
    """Everything a CLI run needs, merged from a config file and flags.

    A config file is JSON; nested sections (e.g. ``{"train": {"epochs": 3}}``) are flattened, so section names are
    only for readability and every leaf key must be a field of this class.
    """
    train_path: Optional[str] = None
    holdout_path: Optional[str] = None
    schema: str = 'clickid-json'
    holdout_schema: str = 'simple-csv'
    n_raters: int = NUM_RATERS
    balance: bool = True

    stopwords: str = DEFAULT_STOPWORDS_PATH
    vocab_path: Optional[str] = None
    max_len: int = MAX_LEN
    split_punctuation: bool = True

    backend: str = 'hash:64:0'
    cache_dir: Optional[str] = CACHE_DIR
    device: Optional[str] = None

    epochs: int = 3
    batch_size: int = 32
    learning_rate: float = 1e-5
    threshold: float = 0.5

    k: int = 5
    seed: int = 42
    shuffle_seed: int = 43
    init_seed: int = 44

    gbt_rounds: int = 200
    gbt_max_depth: int = 4
    gbt_shrinkage: float = 0.1
    gbt_min_gain: float = 0.0

    eda_top_k: int = 10
    eda_remove_stopwords: bool = False

    params_path: Optional[str] = None
    predict_input: Optional[str] = None
    output_dir: str = OUTPUT_DIR
    tensorboard_dir: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return dataclasses.asdict(self)

    def override(self, **values) -> 'RunConfig':
        """Return a copy with the given non-None values replaced."""
        known = {f.name for f in dataclasses.fields(self)}
        for key in values:
            if key not in known:
                raise ConfigError("Unknown config field '{}'".format(key), field=key)
        return dataclasses.replace(self, **{k: v for k, v in values.items() if v is not None})

    def _check_types(self):
        for f in dataclasses.fields(self):
            value = getattr(self, f.name)
            expected = _expected_types(f.type)
            if not any(_matches(value, t) for t in expected):
                names = [_TYPE_NAMES[t] for t in expected if t in _TYPE_NAMES]
                raise ConfigError("Field '{}' must be {}, got {!r}".format(f.name, ' or '.join(names), value),
                                  field=f.name)

    def validate(self, command: str):
        self._check_types()
        if command not in COMMANDS:
            raise ConfigError("Unknown command '{}'".format(command), field='command')
        if self.schema not in SCHEMAS:
            raise ConfigError("Unknown schema '{}'".format(self.schema), field='schema')
        if self.holdout_schema not in SCHEMAS:
            raise ConfigError("Unknown schema '{}'".format(self.holdout_schema), field='holdout_schema')

        for name in _REQUIRED_PATHS[command]:
            value = getattr(self, name)
            if value is None:
                raise ConfigError("Field '{}' is required for '{}'".format(name, command), field=name)
            if not os.path.exists(value):
                raise ConfigError("Field '{}' points to missing path '{}'".format(name, value), field=name)
        if self.holdout_path is not None and not os.path.exists(self.holdout_path):
            raise ConfigError("Field 'holdout_path' points to missing path '{}'".format(self.holdout_path),
                              field='holdout_path')
        if self.stopwords != 'sastrawi' and not os.path.exists(self.stopwords):
            raise ConfigError("Field 'stopwords' points to missing path '{}'".format(self.stopwords),
                              field='stopwords')
        if not self.backend.startswith('hash:') and not os.path.exists(self.backend):
            raise ConfigError("Field 'backend' points to missing model '{}'".format(self.backend), field='backend')

        if self.k < 2:
            raise ConfigError("Field 'k' must be >= 2, got {}".format(self.k), field='k')
        if self.max_len < 3:
            raise ConfigError("Field 'max_len' must be >= 3, got {}".format(self.max_len), field='max_len')
        if self.epochs < 1:
            raise ConfigError("Field 'epochs' must be >= 1, got {}".format(self.epochs), field='epochs')
        if self.batch_size < 1:
            raise ConfigError("Field 'batch_size' must be >= 1, got {}".format(self.batch_size), field='batch_size')
        if not 0.0 < self.threshold < 1.0:
            raise ConfigError("Field 'threshold' must lie in (0, 1), got {}".format(self.threshold),
                              field='threshold')


_TYPE_NAMES = {int: 'an integer', float: 'a number', bool: 'true or false', str: 'a string'}


def _expected_types(annotation) -> tuple:
    if getattr(annotation, '__origin__', None) is Union:
        return annotation.__args__
    return (annotation,)


def _matches(value, expected) -> bool:
    if expected is type(None):
        return value is None
    if expected is bool:
        return isinstance(value, bool)
    if expected is int:
        return isinstance(value, int) and not isinstance(value, bool)
    if expected is float:
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    return isinstance(value, expected)


def _flatten(values: Dict[str, Any]) -> Dict[str, Any]:
    flat = {}
    for key, value in values.items():
        if isinstance(value, dict):
            flat.update(_flatten(value))
        else:
            flat[key] = value
    return flat


def load_run_config(path: Optional[str] = None) -> RunConfig:
    """Load a JSON run config; missing fields keep their defaults."""
    config = RunConfig()
    if path is None:
        return config
    try:
        with open(path, 'r', encoding='utf-8') as f:
            values = json.load(f)
    except OSError as e:
        raise ConfigError("Cannot read config file '{}': {}".format(path, e), field='config')
    except ValueError as e:
        raise ConfigError("Config file '{}' is not valid JSON: {}".format(path, e), field='config')
    if not isinstance(values, dict):
        raise ConfigError("Config file '{}' must hold a JSON object".format(path), field='config')

    return config.override(**_flatten(values))


def parse_assignment(config: RunConfig, assignment: str) -> RunConfig:
    """Apply a ``key=value`` override; the value is parsed as JSON when possible."""
    if '=' not in assignment:
        raise ConfigError("Override '{}' is not of the form key=value".format(assignment), field='set')
    key, raw = assignment.split('=', 1)
    key = key.strip()
    try:
        value = json.loads(raw)
    except ValueError:
        value = raw
    return config.override(**{key: value})
