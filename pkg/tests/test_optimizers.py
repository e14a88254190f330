import numpy as np
import pytest
import torch

from clickbait_id.nn import HeadParams
from clickbait_id.optimizers import Adam, adam_step


def head(rng, width=3, units=4):
    params = HeadParams(width, units)
    with torch.no_grad():
        for p in params.parameters():
            p.copy_(torch.from_numpy(np.asarray(rng.normal(size=tuple(p.shape)))))
    return params


def constant_grads(params, value):
    return {name: torch.full_like(p.data, value) for name, p in params.named_parameters()}


class TestAdam:
    def test_zero_gradient_leaves_params(self):
        params = head(np.random.default_rng(0))
        before = {name: p.data.clone() for name, p in params.named_parameters()}
        optimizer = Adam(params.named_parameters(), lr=1e-3)
        adam_step(params, constant_grads(params, 0.0), optimizer)
        for name, p in params.named_parameters():
            torch.testing.assert_close(p.data, before[name], rtol=0, atol=0)

    @pytest.mark.parametrize('g', [1e-3, 0.5, -2.0])
    def test_first_step_moves_by_learning_rate(self, g):
        params = head(np.random.default_rng(1))
        before = {name: p.data.clone() for name, p in params.named_parameters()}
        optimizer = Adam(params.named_parameters(), lr=1e-3)
        adam_step(params, constant_grads(params, g), optimizer)
        for name, p in params.named_parameters():
            step = (p.data - before[name]).numpy()
            # m_hat = g and v_hat = g^2 after one step, so the update is -lr * g / (|g| + eps).
            np.testing.assert_allclose(step, -1e-3 * g / (abs(g) + 1e-8), rtol=1e-9)

    def test_counter_and_snapshot(self):
        params = head(np.random.default_rng(2))
        optimizer = Adam(params.named_parameters(), lr=1e-5)
        rng = np.random.default_rng(3)
        for t in range(1, 4):
            grads = {name: torch.from_numpy(rng.normal(size=tuple(p.shape))) for name, p in params.named_parameters()}
            _, state = adam_step(params, grads, optimizer)
            assert state.t == t
            assert all(bool((v >= 0).all()) for v in state.v.values())
        assert state.hyper == (1e-5, 0.9, 0.999, 1e-8)
        assert set(state.m) == {'W1', 'b1', 'w2', 'b2'}
        assert state.m['W1'].shape == params.W1.shape

    def test_snapshot_is_a_copy(self):
        params = head(np.random.default_rng(4))
        optimizer = Adam(params.named_parameters())
        _, first = adam_step(params, constant_grads(params, 1.0), optimizer)
        adam_step(params, constant_grads(params, 1.0), optimizer)
        torch.testing.assert_close(first.m['b1'], torch.full_like(params.b1.data, 0.1))

    def test_missing_gradient(self):
        params = head(np.random.default_rng(5))
        optimizer = Adam(params.named_parameters())
        grads = constant_grads(params, 1.0)
        del grads['w2']
        with pytest.raises(ValueError, match='w2'):
            optimizer.local_step(grads)

    def test_shape_mismatch(self):
        params = head(np.random.default_rng(6))
        optimizer = Adam(params.named_parameters())
        grads = constant_grads(params, 1.0)
        grads['b1'] = torch.zeros(7, dtype=torch.float64)
        with pytest.raises(ValueError, match='b1'):
            optimizer.local_step(grads)

    def test_invalid_hyper_parameters(self):
        params = HeadParams(2, 2)
        with pytest.raises(ValueError):
            Adam(params.named_parameters(), lr=-1.0)
        with pytest.raises(ValueError):
            Adam(params.named_parameters(), betas=(1.0, 0.999))
