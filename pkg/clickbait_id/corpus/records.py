import enum
import json
import logging
import os
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from clickbait_id import config
from clickbait_id.exceptions import DataError

__all__ = ['Label', 'HeadlineRecord', 'LabeledDataset', 'load_dataset']

logger = logging.getLogger(__name__)


class Label(str, enum.Enum):
    CLICKBAIT = 'clickbait'
    NON_CLICKBAIT = 'non-clickbait'

    @property
    def other(self) -> 'Label':
        return Label.NON_CLICKBAIT if self is Label.CLICKBAIT else Label.CLICKBAIT

    @property
    def target(self) -> int:
        """Binary target; clickbait is the positive class."""
        return 1 if self is Label.CLICKBAIT else 0

    @classmethod
    def parse(cls, raw) -> 'Label':
        value = str(raw).strip().lower().replace('_', '-').replace(' ', '-')
        if value in ('clickbait', '1'):
            return cls.CLICKBAIT
        if value in ('non-clickbait', 'nonclickbait', '0'):
            return cls.NON_CLICKBAIT
        raise DataError("Unknown label '{}'".format(raw))


@dataclass(frozen=True)
class HeadlineRecord:
    id: str
    title: str
    rater_labels: Tuple[Label, ...]
    final_label: Optional[Label] = None

    def __post_init__(self):
        if not self.title.strip():
            raise DataError("Record '{}' has an empty title".format(self.id))
        if len(self.rater_labels) < 1:
            raise DataError("Record '{}' has no rater labels".format(self.id))
        if self.final_label is not None and any(lbl != self.final_label for lbl in self.rater_labels):
            raise DataError("Record '{}' has final label '{}' without unanimous raters".format(
                self.id, self.final_label.value))

    @property
    def unanimous(self) -> bool:
        return len(set(self.rater_labels)) == 1

    def to_dict(self) -> dict:
        return {
            'id': self.id,
            'title': self.title,
            'rater_labels': [lbl.value for lbl in self.rater_labels],
            'final_label': None if self.final_label is None else self.final_label.value,
        }

    @classmethod
    def from_dict(cls, values: dict) -> 'HeadlineRecord':
        final = values.get('final_label')
        return cls(id=str(values['id']), title=values['title'],
                   rater_labels=tuple(Label.parse(lbl) for lbl in values['rater_labels']),
                   final_label=None if final is None else Label.parse(final))


@dataclass
class LabeledDataset:
    """Records with a final label, plus where they came from and which seeds shaped them."""
    records: List[HeadlineRecord]
    provenance: str = ''
    seed_log: List[Tuple[str, int]] = field(default_factory=list)

    def __post_init__(self):
        seen = set()
        for record in self.records:
            if record.final_label is None:
                raise DataError("Record '{}' has no final label".format(record.id))
            if record.id in seen:
                raise DataError("Duplicate record id '{}'".format(record.id))
            seen.add(record.id)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def titles(self) -> List[str]:
        return [r.title for r in self.records]

    @property
    def targets(self) -> np.ndarray:
        return np.array([r.final_label.target for r in self.records], dtype=np.int64)

    def class_counts(self) -> Dict[Label, int]:
        counts = {Label.CLICKBAIT: 0, Label.NON_CLICKBAIT: 0}
        for record in self.records:
            counts[record.final_label] += 1
        return counts

    def subset(self, indices: Iterable[int], note: Optional[str] = None) -> 'LabeledDataset':
        records = [self.records[i] for i in indices]
        provenance = self.provenance if note is None else '{}; {}'.format(self.provenance, note)
        return replace(self, records=records, provenance=provenance, seed_log=list(self.seed_log))

    def save_jsonl(self, path: str):
        frame = pd.DataFrame([r.to_dict() for r in self.records],
                             columns=['id', 'title', 'rater_labels', 'final_label'])
        frame.to_json(path, orient='records', lines=True, force_ascii=False)

    @classmethod
    def load_jsonl(cls, path: str, provenance: str = '') -> 'LabeledDataset':
        records = []
        with open(path, 'r', encoding='utf-8') as f:
            for line_no, line in enumerate(f, start=1):
                if not line.strip():
                    continue
                try:
                    records.append(HeadlineRecord.from_dict(json.loads(line)))
                except (ValueError, KeyError) as e:
                    raise DataError("{}:{}: {}".format(path, line_no, e))
        return cls(records=records, provenance=provenance or path)


def _row_error(path: str, where: str, error: Exception) -> DataError:
    return DataError("{}:{}: {}".format(path, where, error))


def _clickid_record(row: dict, n_raters: int) -> HeadlineRecord:
    label = Label.parse(row['label'])
    try:
        score = int(row['label_score'])
    except (TypeError, ValueError):
        raise DataError("Invalid label_score '{}'".format(row['label_score']))
    if not 0 <= score <= n_raters:
        raise DataError("label_score '{}' outside [0, {}]".format(score, n_raters))
    if score == 0:
        # Nobody chose the recorded label; every rater picked the other class.
        rater_labels = (label.other,) * n_raters
    else:
        rater_labels = (label,) * score + (label.other,) * (n_raters - score)
    title = row['title']
    if not isinstance(title, str):
        raise DataError("Title must be a string, got '{}'".format(title))
    return HeadlineRecord(id=str(row['id']), title=title, rater_labels=rater_labels)


def _load_clickid_json(path: str, n_raters: int) -> List[HeadlineRecord]:
    with open(path, 'r', encoding='utf-8') as f:
        text = f.read()
    if not text.strip():
        return []

    if text.lstrip().startswith('['):
        try:
            rows = json.loads(text)
        except ValueError as e:
            raise _row_error(path, 'offset {}'.format(getattr(e, 'pos', '?')), e)
        located = [('item {}'.format(i), row) for i, row in enumerate(rows)]
    else:
        located = []
        for line_no, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                located.append(('line {}'.format(line_no), json.loads(line)))
            except ValueError as e:
                raise _row_error(path, 'line {}'.format(line_no), e)

    records = []
    for where, row in located:
        try:
            if not isinstance(row, dict):
                raise DataError("expected a JSON object, got {}".format(type(row).__name__))
            records.append(_clickid_record(row, n_raters))
        except KeyError as e:
            raise _row_error(path, where, DataError("missing field {}".format(e)))
        except DataError as e:
            raise _row_error(path, where, e)
    return records


def _read_csv(path: str, columns: Sequence[str]) -> pd.DataFrame:
    if os.path.getsize(path) == 0:
        return pd.DataFrame(columns=list(columns))
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except (pd.errors.ParserError, UnicodeDecodeError) as e:
        raise DataError("{}: {}".format(path, e))
    missing = [c for c in columns if c not in frame.columns]
    if missing:
        raise DataError("{}: missing column(s) {}".format(path, missing))
    return frame


def _load_clickid_csv(path: str, n_raters: int) -> List[HeadlineRecord]:
    frame = _read_csv(path, ('id', 'title', 'label', 'label_score'))
    records = []
    for index, row in enumerate(frame.to_dict(orient='records')):
        try:
            records.append(_clickid_record(row, n_raters))
        except DataError as e:
            raise _row_error(path, 'line {}'.format(index + 2), e)
    return records


def _load_simple_csv(path: str) -> List[HeadlineRecord]:
    frame = _read_csv(path, ('id', 'title', 'label'))
    records = []
    for index, row in enumerate(frame.to_dict(orient='records')):
        try:
            records.append(HeadlineRecord(id=str(row['id']), title=row['title'],
                                          rater_labels=(Label.parse(row['label']),)))
        except DataError as e:
            raise _row_error(path, 'line {}'.format(index + 2), e)
    return records


def load_dataset(path: str, schema: str = 'clickid-json', n_raters: int = config.NUM_RATERS) -> List[HeadlineRecord]:
    """Read headline records with their per-rater labels.

    Titles are kept verbatim. Schemas:

    * ``clickid-json``: JSON array or JSON Lines of objects with ``id``, ``title``, ``label`` and ``label_score`` (how
      many of the ``n_raters`` raters chose ``label``; the rest chose the other class).
    * ``clickid-csv``: the same fields as a CSV file.
    * ``simple-csv``: header ``id,title,label``, one already-decided label per row.

    Raises:
        DataError: on a malformed row (with line or item position) or an unknown label (naming the value).
    """
    if not os.path.exists(path):
        raise DataError("Dataset file '{}' does not exist".format(path))

    if schema == 'clickid-json':
        records = _load_clickid_json(path, n_raters)
    elif schema == 'clickid-csv':
        records = _load_clickid_csv(path, n_raters)
    elif schema == 'simple-csv':
        records = _load_simple_csv(path)
    else:
        raise DataError("Unknown ingestion schema '{}'".format(schema))

    logger.info("Loaded {} record(s) from '{}' ({}).".format(len(records), path, schema))
    return records
