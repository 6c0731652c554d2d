from .model import (
    ConfigError,
    ModelConfig,
    ModelState,
    NumericError,
    forward,
    loss_and_grads,
    loss_grads_logits,
    model_init,
    param_count,
    param_names,
    per_byte_accuracy,
)
from .optim import OptimizerState, TrainConfig, adamw_step, lr_schedule
from .checkpoint import load_checkpoint, save_checkpoint

__all__ = [
    "ConfigError",
    "ModelConfig",
    "ModelState",
    "NumericError",
    "OptimizerState",
    "TrainConfig",
    "adamw_step",
    "forward",
    "load_checkpoint",
    "loss_and_grads",
    "loss_grads_logits",
    "lr_schedule",
    "model_init",
    "param_count",
    "param_names",
    "per_byte_accuracy",
    "save_checkpoint",
]
