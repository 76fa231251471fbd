"""Batch benchmarking harness for audio deepfake detectors.

Pipeline: dataset registry -> manifest normalization -> audio preprocessing
(resample, peak-normalize, fixed duration) -> scorer (built-in or external
process over a line-delimited JSON protocol) -> EER/AUC/accuracy metrics ->
taxonomy-group aggregation and report emission.
"""

from .audio import AudioBuffer, decode, fit_duration, normalize_amplitude, preprocess, resample
from .config import EvalConfig, parse_config
from .manifest import (
    ManifestEntry,
    ValidationReport,
    normalize_labels,
    read_manifest,
    validate_manifest,
    write_manifest,
)
from .metrics import (
    LabeledScores,
    MetricsReport,
    RocCurve,
    auc,
    compute_report,
    confusion_at_threshold,
    eer,
    roc_curve,
)
from .registry import (
    Category,
    DatasetDescriptor,
    FetchDescriptor,
    GenerativeMethod,
    default_registry,
    load_registry,
    select_group,
)
from .report import GroupSummary, RunResult, aggregate, emit_latex, emit_results
from .runner import prepare_dataset, reemit_run, run_evaluation
from .scorer import ExternalScorer, ScoreRecord, ScorerInfo, builtin_scorer
from .synthcorpus import CorpusSpec, generate_corpus

__version__ = "0.1.0"
