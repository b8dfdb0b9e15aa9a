"""Shared numerics: clamped, numerically stable sigmoid family (float64)."""

import numpy as np

# Dot products / logits are clamped here before exponentiation, which also
# bounds probabilities away from exact 0 and 1.
LOGIT_CLAMP = 30.0


def sigmoid(x):
    """Stable sigmoid of clamped input; output in (sigma(-30), sigma(30))."""
    x = np.clip(np.asarray(x, dtype=np.float64), -LOGIT_CLAMP, LOGIT_CLAMP)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out if out.ndim else float(out)


def softplus(x):
    """log(1 + exp(x)) of clamped input; equals -log sigmoid(-x)."""
    x = np.clip(np.asarray(x, dtype=np.float64), -LOGIT_CLAMP, LOGIT_CLAMP)
    out = np.maximum(x, 0.0) + np.log1p(np.exp(-np.abs(x)))
    return out if out.ndim else float(out)
