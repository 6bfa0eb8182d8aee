from .corpus import Corpus, CorpusItem, load_corpus, load_tensor, save_corpus, save_tensor
from .experiment import (
    DetectorSpec,
    ExperimentConfig,
    load_config,
    load_train_config,
    run_experiment,
    saturation_sweep,
    train_from_config,
)
from .transfer import (
    TargetTransfer,
    TransferReport,
    avg_linf,
    hit_target_rate,
    select_eligible,
    transfer_predictions,
    transfer_rate,
)

__all__ = [
    "Corpus",
    "CorpusItem",
    "DetectorSpec",
    "ExperimentConfig",
    "TargetTransfer",
    "TransferReport",
    "avg_linf",
    "hit_target_rate",
    "load_config",
    "load_corpus",
    "load_tensor",
    "load_train_config",
    "run_experiment",
    "saturation_sweep",
    "save_corpus",
    "save_tensor",
    "select_eligible",
    "train_from_config",
    "transfer_predictions",
    "transfer_rate",
]
