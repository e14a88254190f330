from typing import Dict, NamedTuple, Tuple

import torch
from torch.optim.optimizer import Optimizer

__all__ = ['Adam', 'AdamState', 'adam_step']


class AdamState(NamedTuple):
    """Snapshot of the optimizer: first/second moments per parameter name, step counter and hyper-parameters."""
    m: Dict[str, torch.Tensor]
    v: Dict[str, torch.Tensor]
    t: int
    hyper: Tuple[float, float, float, float]


class Adam(Optimizer):
    """Bias-corrected Adam driven by externally computed gradients.

    Gradients are passed to ``local_step`` keyed by parameter name, so the parameters never need autograd.

    Args:
        named_params: ``(name, parameter)`` pairs, e.g. ``module.named_parameters()``.
        lr: Learning rate.
        betas: Decay rates of the first and second moment estimates.
        eps: Term added to the denominator.
    """

    def __init__(self, named_params, lr=1e-5, betas=(0.9, 0.999), eps=1e-8):
        self.param_names, params = zip(*named_params)

        if lr < 0.0:
            raise ValueError("Invalid learning rate: {}".format(lr))
        if not 0.0 <= betas[0] < 1.0 or not 0.0 <= betas[1] < 1.0:
            raise ValueError("Invalid beta parameters: {}".format(betas))
        if eps < 0.0:
            raise ValueError("Invalid epsilon value: {}".format(eps))

        defaults = dict(lr=lr, betas=betas, eps=eps)
        super(Adam, self).__init__(params, defaults)
        self.t = 0

    def _moments(self, p: torch.Tensor) -> Tuple[torch.Tensor, torch.Tensor]:
        state = self.state[p]
        if not state:
            state['exp_avg'] = torch.zeros_like(p.data)
            state['exp_avg_sq'] = torch.zeros_like(p.data)
        return state['exp_avg'], state['exp_avg_sq']

    def local_step(self, grads: Dict[str, torch.Tensor], closure=None):
        """Performs a single Adam step with the given per-parameter gradients."""
        loss = None
        if closure is not None:
            loss = closure()

        missing = [name for name in self.param_names if name not in grads]
        if missing:
            raise ValueError("Missing gradients for parameter(s) {}".format(missing))

        self.t += 1
        with torch.no_grad():
            for group in self.param_groups:
                beta1, beta2 = group['betas']
                bias_correction1 = 1 - beta1 ** self.t
                bias_correction2 = 1 - beta2 ** self.t
                for name, p in zip(self.param_names, group['params']):
                    d_p = grads[name]
                    if d_p.shape != p.shape:
                        raise ValueError("Gradient for '{}' has shape {}, expected {}".format(
                            name, list(d_p.shape), list(p.shape)))

                    exp_avg, exp_avg_sq = self._moments(p)
                    exp_avg.mul_(beta1).add_(d_p, alpha=1 - beta1)
                    exp_avg_sq.mul_(beta2).addcmul_(d_p, d_p, value=1 - beta2)

                    denom = (exp_avg_sq / bias_correction2).sqrt_().add_(group['eps'])
                    p.data.addcdiv_(exp_avg / bias_correction1, denom, value=-group['lr'])

        return loss

    def snapshot(self) -> AdamState:
        group = self.param_groups[0]
        m, v = {}, {}
        for name, p in zip(self.param_names, group['params']):
            exp_avg, exp_avg_sq = self._moments(p)
            m[name] = exp_avg.clone()
            v[name] = exp_avg_sq.clone()
        return AdamState(m=m, v=v, t=self.t, hyper=(group['lr'], group['betas'][0], group['betas'][1], group['eps']))


def adam_step(params: torch.nn.Module, grads: Dict[str, torch.Tensor], optimizer: Adam):
    """Apply one Adam update to ``params`` in place; returns ``(params, state snapshot)``."""
    optimizer.local_step(grads)
    return params, optimizer.snapshot()
