"""Command-line entry point.

Every command reads one merged ``RunConfig`` (JSON config file, then flags, then ``--set key=value`` overrides),
writes its artifacts under ``<output_dir>/<command>/`` (cleared of files from earlier runs) and finishes with a
``manifest.json`` holding the merged config, the seeds, the SHA-256 of every artifact, counts and wall time.
A failed run removes the artifacts it already wrote and leaves a manifest with status ``incomplete``.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 any other error.
"""
import argparse
import datetime
import json
import logging
import os
import sys
import time
from typing import Any, Dict, List, Optional, Sequence, Tuple

import pandas as pd

from clickbait_id import config, reports
from clickbait_id.baseline import GbtConfig
from clickbait_id.config import RunConfig
from clickbait_id.corpus import Label, LabeledDataset, balance_undersample, dataset_kappa, filter_full_agreement, \
    frequency_frame, load_dataset, stratified_kfold, top_k_words, word_frequencies
from clickbait_id.embed import backend_from_spec
from clickbait_id.evaluators import cross_validate, evaluate_holdout
from clickbait_id.exceptions import ConfigError, DataError, PipelineError
from clickbait_id.nn import load_params, save_params
from clickbait_id.pipelines import HeadPipeline, TfidfGbtPipeline
from clickbait_id.preprocess import HeadlineEncoder, load_stopwords, load_vocab
from clickbait_id.trainers import TrainConfig
from clickbait_id.utils import atomic_write_bytes, sha256_file

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_RUNTIME = 4


class RunManifest:
    """Tracks the artifacts of one command run and writes the manifest."""

    def __init__(self, command: str, run_config: RunConfig):
        self.command = command
        self.config = run_config
        self.directory = os.path.join(run_config.output_dir, command)
        self.path = os.path.join(self.directory, 'manifest.json')
        self.artifacts: List[str] = []
        self.counts: Dict[str, Any] = {}
        self.timings: Dict[str, float] = {}
        self.started = time.perf_counter()
        self.started_at = datetime.datetime.now(datetime.timezone.utc).isoformat()
        self.logger = logging.getLogger(__name__ + "." + self.__class__.__name__)
        self._clear()

    def _clear(self):
        """Remove files left by an earlier run of the same command; the run's own input files are kept."""
        if not os.path.isdir(self.directory):
            return
        inputs = {os.path.abspath(p) for p in (self.config.train_path, self.config.holdout_path, self.config.vocab_path,
                                               self.config.params_path, self.config.predict_input,
                                               self.config.stopwords, self.config.backend) if p}
        for name in os.listdir(self.directory):
            path = os.path.join(self.directory, name)
            if os.path.abspath(path) in inputs:
                continue
            if os.path.isfile(path) or os.path.islink(path):
                os.remove(path)
                self.logger.debug("Removed stale file '{}'.".format(path))

    def artifact(self, name: str) -> str:
        """Register an artifact file name and return its path."""
        os.makedirs(self.directory, exist_ok=True)
        self.artifacts.append(name)
        return os.path.join(self.directory, name)

    def discard(self):
        for name in self.artifacts:
            path = os.path.join(self.directory, name)
            if os.path.exists(path):
                os.remove(path)
                self.logger.debug("Removed partial artifact '{}'.".format(path))
        self.artifacts = []

    def write(self, status: str, error: Optional[str] = None):
        hashes = {name: sha256_file(os.path.join(self.directory, name)) for name in self.artifacts
                  if os.path.exists(os.path.join(self.directory, name))}
        payload = {
            'command': self.command,
            'status': status,
            'config': self.config.to_dict(),
            'seeds': {'seed': self.config.seed, 'shuffle_seed': self.config.shuffle_seed,
                      'init_seed': self.config.init_seed},
            'artifacts': hashes,
            'counts': self.counts,
            'timings': self.timings,
            'started_at': self.started_at,
            'wall_seconds': time.perf_counter() - self.started,
        }
        if error is not None:
            payload['error'] = error
        os.makedirs(self.directory, exist_ok=True)
        atomic_write_bytes(self.path, (json.dumps(payload, indent=2, sort_keys=True, default=str) + '\n').encode())
        self.logger.info("Wrote manifest '{}' ({}).".format(self.path, status))


def _progress() -> bool:
    return logger.isEnabledFor(logging.INFO) and sys.stderr.isatty()


def _cache_dir(run_config: RunConfig) -> Optional[str]:
    if not run_config.cache_dir or run_config.cache_dir.lower() == 'none':
        return None
    return run_config.cache_dir


def _train_config(run_config: RunConfig) -> TrainConfig:
    return TrainConfig(epochs=run_config.epochs, batch_size=run_config.batch_size, seed=run_config.init_seed,
                       learning_rate=run_config.learning_rate, threshold=run_config.threshold,
                       shuffle_seed=run_config.shuffle_seed)


def _gbt_config(run_config: RunConfig) -> GbtConfig:
    return GbtConfig(rounds=run_config.gbt_rounds, max_depth=run_config.gbt_max_depth,
                     shrinkage=run_config.gbt_shrinkage, min_gain=run_config.gbt_min_gain)


def _filtered(run_config: RunConfig, manifest: RunManifest) -> LabeledDataset:
    records = load_dataset(run_config.train_path, run_config.schema, run_config.n_raters)
    if not records:
        raise DataError("Dataset '{}' holds no records".format(run_config.train_path))
    dataset = filter_full_agreement(records, provenance=run_config.train_path)
    counts = dataset.class_counts()
    manifest.counts.update({'loaded': len(records), 'kept': len(dataset), 'dropped': len(records) - len(dataset),
                            Label.CLICKBAIT.value: counts[Label.CLICKBAIT],
                            Label.NON_CLICKBAIT.value: counts[Label.NON_CLICKBAIT]})
    if run_config.n_raters >= 2:
        try:
            manifest.counts['kappa_before_filter'] = dataset_kappa(records)
            manifest.counts['kappa_after_filter'] = dataset_kappa(dataset.records) if len(dataset) else None
        except ValueError as e:
            logger.warning("Fleiss' kappa unavailable: {}".format(e))
    return dataset


def _training_set(run_config: RunConfig, manifest: RunManifest) -> LabeledDataset:
    dataset = _filtered(run_config, manifest)
    if run_config.balance:
        dataset = balance_undersample(dataset, run_config.seed)
        manifest.counts['balanced'] = len(dataset)
    return dataset


def _stopwords(run_config: RunConfig):
    return load_stopwords(run_config.stopwords)


def _head_pipeline(run_config: RunConfig, params_path: Optional[str] = None) -> HeadPipeline:
    """Encoder pipeline from the config; with ``params_path`` the head is loaded instead of trained."""
    vocab = load_vocab(run_config.vocab_path)
    encoder = HeadlineEncoder(vocab, stopwords=_stopwords(run_config), max_len=run_config.max_len,
                              split_punct=run_config.split_punctuation)
    backend = backend_from_spec(run_config.backend, device=run_config.device)
    params = None if params_path is None else load_params(params_path, expected_width=backend.hidden_width)
    return HeadPipeline(encoder, backend, _train_config(run_config), cache_dir=_cache_dir(run_config), params=params,
                        progress=_progress(), tensorboard_dir=run_config.tensorboard_dir)


def _write_report(manifest: RunManifest, prefix: str, folds):
    reports.write_frame(reports.report_frame(folds), manifest.artifact('{}report.csv'.format(prefix)))
    reports.write_frame(reports.roc_frame(folds), manifest.artifact('{}roc.csv'.format(prefix)))


def cmd_ingest(run_config: RunConfig, manifest: RunManifest):
    dataset = _filtered(run_config, manifest)
    dataset.save_jsonl(manifest.artifact('filtered.jsonl'))
    if run_config.balance:
        balanced = balance_undersample(dataset, run_config.seed)
        manifest.counts['balanced'] = len(balanced)
        balanced.save_jsonl(manifest.artifact('balanced.jsonl'))


def _frequency_artifacts(manifest: RunManifest, dataset: LabeledDataset, prefix: str, stopwords, top_k: int):
    frequencies = {label: word_frequencies(dataset, label, stopwords=stopwords)
                   for label in (Label.CLICKBAIT, Label.NON_CLICKBAIT)}
    reports.write_frame(frequency_frame(frequencies), manifest.artifact('{}frequencies.csv'.format(prefix)))

    rows = []
    for label, counts in frequencies.items():
        top = top_k_words(counts, top_k)
        manifest.counts['{}top_words_{}'.format(prefix, label.value)] = top
        rows.extend({'rank': rank, 'word': word, 'count': count, 'class': label.value}
                    for rank, (word, count) in enumerate(top, start=1))
    reports.write_frame(pd.DataFrame(rows, columns=['rank', 'word', 'count', 'class']),
                        manifest.artifact('{}top_words.csv'.format(prefix)))


def cmd_eda(run_config: RunConfig, manifest: RunManifest):
    dataset = _filtered(run_config, manifest)
    stopwords = _stopwords(run_config) if run_config.eda_remove_stopwords else None
    _frequency_artifacts(manifest, dataset, '', stopwords, run_config.eda_top_k)
    if run_config.holdout_path is not None:
        holdout = _holdout(run_config)
        _frequency_artifacts(manifest, holdout, 'holdout_', stopwords, run_config.eda_top_k)


def cmd_train(run_config: RunConfig, manifest: RunManifest):
    dataset = _training_set(run_config, manifest)
    pipeline = _head_pipeline(run_config).fit(dataset)
    save_params(pipeline.params, manifest.artifact('params.bin'))
    reports.write_frame(reports.training_log_frame(pipeline.log), manifest.artifact('training_log.csv'))
    manifest.counts.update({'hidden_width': pipeline.params.hidden_width, 'final_loss': pipeline.log[-1].mean_loss})


def cmd_crossval(run_config: RunConfig, manifest: RunManifest):
    dataset = _training_set(run_config, manifest)
    report = cross_validate(dataset, _head_pipeline(run_config), run_config.k, run_config.seed,
                            config_snapshot=run_config.to_dict())
    _write_report(manifest, '', report.folds)
    manifest.counts.update({'mean_{}'.format(name): value for name, value in report.means.items()})
    manifest.timings['folds'] = [f.seconds for f in report.folds]


def _read_titles(path: str) -> Tuple[List[str], List[str]]:
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise DataError("{}: {}".format(path, e))
    missing = [c for c in ('id', 'title') if c not in frame.columns]
    if missing:
        raise DataError("{}: missing column(s) {}".format(path, missing))
    return frame['id'].tolist(), frame['title'].tolist()


def cmd_predict(run_config: RunConfig, manifest: RunManifest):
    pipeline = _head_pipeline(run_config, params_path=run_config.params_path)
    ids, titles = _read_titles(run_config.predict_input)
    predictions = pipeline.predict(titles)
    reports.write_frame(reports.predictions_frame(ids, predictions), manifest.artifact('predictions.csv'))
    manifest.counts['predicted'] = len(predictions)


def cmd_compare(run_config: RunConfig, manifest: RunManifest):
    dataset = _training_set(run_config, manifest)
    split = stratified_kfold(dataset, run_config.k, run_config.seed)
    pipelines = [_head_pipeline(run_config),
                 TfidfGbtPipeline(stopwords=_stopwords(run_config), gbt_config=_gbt_config(run_config),
                                  threshold=run_config.threshold, progress=_progress())]

    results = {}
    for pipeline in pipelines:
        started = time.perf_counter()
        results[pipeline.name] = cross_validate(dataset, pipeline, run_config.k, split=split,
                                                config_snapshot=run_config.to_dict())
        manifest.timings[pipeline.name] = time.perf_counter() - started
        _write_report(manifest, '{}_'.format(pipeline.name), results[pipeline.name].folds)

    reports.write_frame(reports.comparison_frame(results), manifest.artifact('comparison.csv'))
    manifest.counts['folds_won'] = reports.folds_won(results)


def _holdout(run_config: RunConfig) -> LabeledDataset:
    records = load_dataset(run_config.holdout_path, run_config.holdout_schema, run_config.n_raters)
    return filter_full_agreement(records, provenance=run_config.holdout_path)


def cmd_evaluate_holdout(run_config: RunConfig, manifest: RunManifest):
    dataset = _training_set(run_config, manifest)
    holdout = _holdout(run_config)
    manifest.counts['holdout'] = len(holdout)

    pipeline = _head_pipeline(run_config).fit(dataset)
    report = evaluate_holdout(pipeline, holdout)
    _write_report(manifest, 'holdout_', [report])
    predictions = pipeline.predict(holdout.titles)
    reports.write_frame(reports.predictions_frame([r.id for r in holdout], predictions),
                        manifest.artifact('holdout_predictions.csv'))
    manifest.counts.update({'holdout_accuracy': report.accuracy, 'holdout_precision': report.precision,
                            'holdout_recall': report.recall, 'holdout_f1': report.f1})


COMMANDS = {
    'ingest': cmd_ingest,
    'eda': cmd_eda,
    'train': cmd_train,
    'crossval': cmd_crossval,
    'predict': cmd_predict,
    'compare': cmd_compare,
    'evaluate-holdout': cmd_evaluate_holdout,
}


def exit_code(error: BaseException) -> int:
    if isinstance(error, ConfigError):
        return EXIT_CONFIG
    if isinstance(error, DataError) or isinstance(error, PipelineError) and isinstance(error.__cause__, DataError):
        return EXIT_DATA
    return EXIT_RUNTIME


def run(command: str, run_config: RunConfig) -> int:
    """Validate ``run_config`` for ``command``, execute it and write the manifest; returns the exit status."""
    try:
        run_config.validate(command)
    except ConfigError as e:
        logger.error("Invalid configuration: {}".format(e))
        return EXIT_CONFIG

    manifest = RunManifest(command, run_config)
    try:
        COMMANDS[command](run_config, manifest)
    except Exception as e:
        logger.error("Command '{}' failed: {}".format(command, e))
        logger.debug("Traceback:", exc_info=True)
        manifest.discard()
        manifest.write('incomplete', error=str(e))
        return exit_code(e)

    manifest.write('complete')
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='clickbait-id', description="Indonesian clickbait headline classification.")
    parser.add_argument('command', choices=list(COMMANDS))
    parser.add_argument('--config', help="JSON run config file")
    parser.add_argument('--train', dest='train_path', help="training dataset file")
    parser.add_argument('--holdout', dest='holdout_path', help="holdout dataset file")
    parser.add_argument('--schema', help="schema of the training dataset: {}".format(', '.join(config.SCHEMAS)))
    parser.add_argument('--vocab', dest='vocab_path', help="WordPiece vocabulary file")
    parser.add_argument('--stopwords', help="stopword file, or 'sastrawi'")
    parser.add_argument('--backend', help="'hash:<width>:<seed>' or path of an ONNX encoder")
    parser.add_argument('--cache-dir', dest='cache_dir', help="embedding cache directory, or 'none'")
    parser.add_argument('--device', choices=['cpu', 'cuda'])
    parser.add_argument('--params', dest='params_path', help="head params file (predict)")
    parser.add_argument('--input', dest='predict_input', help="CSV with id,title columns (predict)")
    parser.add_argument('--output-dir', dest='output_dir')
    parser.add_argument('--tensorboard-dir', dest='tensorboard_dir')
    parser.add_argument('--seed', type=int, help="sampling seed (balancing and folds)")
    parser.add_argument('--k', type=int, help="number of cross-validation folds")
    parser.add_argument('--max-len', dest='max_len', type=int)
    parser.add_argument('--epochs', type=int)
    parser.add_argument('--set', dest='assignments', action='append', default=[], metavar='KEY=VALUE',
                        help="override any config field; repeatable")
    parser.add_argument('-v', '--verbose', action='store_true')
    return parser


_FLAG_FIELDS = ('train_path', 'holdout_path', 'schema', 'vocab_path', 'stopwords', 'backend', 'cache_dir', 'device',
                'params_path', 'predict_input', 'output_dir', 'tensorboard_dir', 'seed', 'k', 'max_len', 'epochs')


def resolve_config(args: argparse.Namespace) -> RunConfig:
    run_config = config.load_run_config(args.config)
    run_config = run_config.override(**{name: getattr(args, name) for name in _FLAG_FIELDS})
    for assignment in args.assignments:
        run_config = config.parse_assignment(run_config, assignment)
    return run_config


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format=config.LOGGING_FORMAT)

    try:
        run_config = resolve_config(args)
    except ConfigError as e:
        logger.error("Invalid configuration: {}".format(e))
        return EXIT_CONFIG
    return run(args.command, run_config)


if __name__ == '__main__':
    sys.exit(main())
