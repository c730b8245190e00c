"""Shared model instances for the tests."""

from ctrwlimit.models import ModelSpec

ALL_MODELS = [
    ModelSpec("uncoupled-gaussian", beta=0.5),
    ModelSpec("uncoupled-stable", beta=0.6, alpha=1.5),
    ModelSpec("levy-walk", beta=0.7),
    ModelSpec("levy-walk", beta=0.7, sign_mode="symmetric"),
    ModelSpec("gaussian-coupled", beta=0.5),
    ModelSpec("drifted-subordinator", beta=0.5, gamma=1.0),
    ModelSpec("pure-drift", gamma=2.0, sigma2=1.0),
]


def model_id(m):
    return m.kind + ("-symmetric" if m.sign_mode == "symmetric" else "")
