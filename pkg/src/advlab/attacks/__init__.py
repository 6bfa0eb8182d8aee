from .batch import BatchResult, attack_batch, run_attack
from .config import AdvRecord, CwL2Config, CwLinfConfig, FgsmConfig, PgdConfig
from .cw import cw_l2, cw_linf
from .gradient_sign import fgsm, pgd

__all__ = [
    "AdvRecord",
    "BatchResult",
    "CwL2Config",
    "CwLinfConfig",
    "FgsmConfig",
    "PgdConfig",
    "attack_batch",
    "cw_l2",
    "cw_linf",
    "fgsm",
    "pgd",
    "run_attack",
]
