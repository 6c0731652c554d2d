"""Optimizer update rule, scheduler, and checkpoint serialization."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ecclab.nn import (
    ModelConfig,
    NumericError,
    OptimizerState,
    TrainConfig,
    adamw_step,
    load_checkpoint,
    lr_schedule,
    model_init,
    save_checkpoint,
)


def _scalar_setup(theta, beta1=0.0, beta2=0.0, lr=0.1, eps=1e-8, wd=0.0, **kw):
    params = {"w": np.array([theta], dtype=np.float64)}
    state = OptimizerState.init_like(params)
    cfg = TrainConfig(learning_rate=lr, beta1=beta1, beta2=beta2,
                      epsilon=eps, weight_decay=wd, **kw)
    return params, state, cfg


def test_config_validation():
    with pytest.raises(ValueError):
        TrainConfig(beta1=1.0)
    with pytest.raises(ValueError):
        TrainConfig(beta2=-0.1)
    with pytest.raises(ValueError):
        TrainConfig(epsilon=0.0)
    with pytest.raises(ValueError):
        TrainConfig(learning_rate=-1.0)
    with pytest.raises(ValueError):
        TrainConfig(weight_decay=-1e-9)
    with pytest.raises(ValueError):
        TrainConfig(scheduler="linear")


def test_null_gradient_leaves_parameters_unchanged():
    params, state, cfg = _scalar_setup(1.5)
    adamw_step(params, {"w": np.zeros(1)}, state, cfg)
    assert params["w"][0] == 1.5
    assert state.t == 1


def test_hand_computed_update_beta_zero():
    # theta=1.0, g=0.5, lr=0.1, b1=b2=0, eps=1e-8, wd=0:
    # theta' = 1.0 - 0.1 * 0.5 / (sqrt(0.25) + 1e-8)
    params, state, cfg = _scalar_setup(1.0)
    adamw_step(params, {"w": np.array([0.5])}, state, cfg)
    expected = 1.0 - 0.1 * 0.5 / (math.sqrt(0.25) + 1e-8)
    assert abs(params["w"][0] - expected) < 1e-12
    assert abs(params["w"][0] - 0.9) < 1e-8


def test_pure_decay_term():
    params, state, cfg = _scalar_setup(2.0, lr=0.1, wd=0.5)
    adamw_step(params, {"w": np.zeros(1)}, state, cfg)
    assert abs(params["w"][0] - 2.0 * (1 - 0.1 * 0.5)) < 1e-12


def test_beta1_zero_numerator_is_exactly_the_gradient():
    params, state, cfg = _scalar_setup(1.0, beta2=0.9)
    g = np.array([0.371])
    adamw_step(params, {"w": g.copy()}, state, cfg)
    assert state.m["w"][0] == g[0]  # bitwise: 0*m + 1*g
    # second step with stale m still reduces to the raw gradient
    g2 = np.array([-0.12])
    adamw_step(params, {"w": g2.copy()}, state, cfg)
    assert state.m["w"][0] == g2[0]


def test_moments_store_blended_values():
    params, state, cfg = _scalar_setup(1.0, beta1=0.9, beta2=0.999)
    g = np.array([2.0])
    adamw_step(params, {"w": g}, state, cfg)
    assert abs(state.m["w"][0] - 0.1 * 2.0) < 1e-15
    assert abs(state.v["w"][0] - 0.001 * 4.0) < 1e-15
    adamw_step(params, {"w": g}, state, cfg)
    assert abs(state.m["w"][0] - (0.9 * 0.2 + 0.1 * 2.0)) < 1e-15


def test_no_bias_correction_by_default():
    # with bias correction the first b1=0.9 step would divide m by 0.1
    params, state, cfg = _scalar_setup(0.0, beta1=0.9, beta2=0.0, lr=1.0, eps=1e-12)
    adamw_step(params, {"w": np.array([1.0])}, state, cfg)
    # numerator 0.1*1.0, denominator sqrt(1.0): step = 0.1, not 1.0
    assert abs(params["w"][0] + 0.1) < 1e-9


def test_bias_correction_flag():
    params, state, cfg = _scalar_setup(0.0, beta1=0.9, beta2=0.999, lr=1.0,
                                       eps=0.0 + 1e-16, bias_correction=True)
    adamw_step(params, {"w": np.array([1.0])}, state, cfg)
    # corrected first step of the conventional optimizer is -lr * g/|g|
    assert abs(params["w"][0] + 1.0) < 1e-6


def test_nonfinite_gradient_refused_and_state_untouched():
    params, state, cfg = _scalar_setup(1.0)
    with pytest.raises(NumericError):
        adamw_step(params, {"w": np.array([np.nan])}, state, cfg)
    assert params["w"][0] == 1.0
    assert state.t == 0
    assert state.m["w"][0] == 0.0


@given(st.lists(st.floats(min_value=-10, max_value=10, allow_nan=False), min_size=1, max_size=8))
@settings(max_examples=200, deadline=None)
def test_second_moment_never_negative(gs):
    params, state, cfg = _scalar_setup(0.5, beta1=0.3, beta2=0.9)
    for g in gs:
        adamw_step(params, {"w": np.array([g])}, state, cfg)
        assert state.v["w"][0] >= 0.0
        assert np.isfinite(params["w"][0])


def test_lr_schedule_none_constant():
    cfg = TrainConfig(learning_rate=0.02, scheduler="none", epochs=10)
    assert [lr_schedule(cfg, e) for e in (0, 5, 10, 99)] == [0.02] * 4


def test_lr_schedule_cosine_endpoints_and_monotone():
    cfg = TrainConfig(learning_rate=1.0, scheduler="cosine", epochs=100)
    assert lr_schedule(cfg, 0) == 1.0
    assert abs(lr_schedule(cfg, 100) - 0.01) < 1e-12
    rates = [lr_schedule(cfg, e) for e in range(101)]
    assert all(a >= b for a, b in zip(rates, rates[1:]))
    assert lr_schedule(cfg, 1000) == rates[-1]  # clamps past the horizon
    with pytest.raises(ValueError):
        lr_schedule(cfg, -1)


def test_checkpoint_round_trip(tmp_path):
    cfg = ModelConfig(hidden_size=16, num_layers=2, num_heads=2, ffn_mult=2, seed=9)
    state = model_init(cfg)
    opt = OptimizerState.init_like(state.params)
    rng = np.random.default_rng(0)
    grads = {k: rng.normal(size=p.shape).astype(p.dtype) for k, p in state.params.items()}
    adamw_step(state.params, grads, opt, TrainConfig())
    path = save_checkpoint(tmp_path / "ck.bin", state, opt)
    loaded_state, loaded_opt = load_checkpoint(path)
    assert loaded_state.config == cfg
    assert loaded_opt.t == 1
    for k in state.params:
        assert np.array_equal(loaded_state.params[k], state.params[k])
        assert np.array_equal(loaded_opt.m[k], opt.m[k])
        assert np.array_equal(loaded_opt.v[k], opt.v[k])


def test_checkpoint_bytes_deterministic(tmp_path):
    cfg = ModelConfig(hidden_size=16, num_layers=1, num_heads=2, seed=1)
    state = model_init(cfg)
    opt = OptimizerState.init_like(state.params)
    p1 = save_checkpoint(tmp_path / "a.bin", state, opt)
    p2 = save_checkpoint(tmp_path / "b.bin", state, opt)
    assert p1.read_bytes() == p2.read_bytes()


def test_checkpoint_rejects_garbage(tmp_path):
    p = tmp_path / "trash.bin"
    p.write_bytes(b"NOPE" * 10)
    with pytest.raises(ValueError):
        load_checkpoint(p)
