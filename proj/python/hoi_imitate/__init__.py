"""Physics-based human-object interaction imitation on a planar toy arm."""

import json

from . import _hoi
from ._hoi import HoiError, Policy, Sequence, cg_error, extract_cg, generate_demo

__all__ = [
    "HoiError",
    "Policy",
    "Sequence",
    "cg_error",
    "default_config",
    "evaluate",
    "evaluate_replay",
    "export_rectified",
    "extract_cg",
    "generate_demo",
    "replay",
    "reward",
    "train",
]


def _config(config):
    if config is None:
        return ""
    return config if isinstance(config, str) else json.dumps(config)


def default_config():
    """Default experiment settings as a dict."""
    return json.loads(_hoi.default_config())


def reward(sim, sim_frame, ref, ref_frame, mode="multiplicative", preset="ball_play"):
    """Reward channels of sim[sim_frame] tracking ref[ref_frame]."""
    return json.loads(_hoi.reward(sim, sim_frame, ref, ref_frame, mode, preset))


def replay(seq, config=None):
    """Kinematic playback: (recorded Sequence, per-frame penetration in metres)."""
    return _hoi.replay(seq, _config(config))


def evaluate_replay(seq, config=None):
    return json.loads(_hoi.evaluate_replay(seq, _config(config)))


def train(seq, config=None, output_dir=""):
    """Train a policy; config is a dict in the experiment JSON format."""
    return _hoi.train(seq, _config(config), str(output_dir))


def evaluate(policy, seq, config=None, repeats=10):
    return json.loads(_hoi.evaluate(policy, seq, _config(config), repeats))


def export_rectified(policy, seq, config=None, path=""):
    """(rectified Sequence, max penetration m, frames over slop)."""
    return _hoi.export_rectified(policy, seq, _config(config), str(path))
