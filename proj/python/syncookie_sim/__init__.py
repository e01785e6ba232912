"""Python bindings for the SYN cookie forgery simulator."""

import json

from ._core import (
    ConfigError,
    CookieLayout,
    IoError,
    SecretKey,
    encode_cookie,
    render_timeline_svg,
    success_probability,
    valid_cookie_set,
    validate_cookie,
)
from . import _core


def _settings(kwargs):
    # hash_bits=12 -> {"hash-bits": "12"}; booleans become switches.
    out = {}
    for k, v in kwargs.items():
        if isinstance(v, bool):
            v = "true" if v else "false"
        out[k.replace("_", "-")] = str(v)
    return out


def simulate(config_text="", **settings):
    res = _core.simulate(_settings(settings), config_text)
    res["report"] = json.loads(res["report"])
    return res


def campaign(config_text="", **settings):
    res = _core.campaign(_settings(settings), config_text)
    res["stats"] = json.loads(res["stats"])
    return res


def analyze(csv, theoretical_mean=0.0):
    return json.loads(_core.analyze(csv, theoretical_mean))


__all__ = [
    "ConfigError",
    "CookieLayout",
    "IoError",
    "SecretKey",
    "analyze",
    "campaign",
    "encode_cookie",
    "render_timeline_svg",
    "simulate",
    "success_probability",
    "valid_cookie_set",
    "validate_cookie",
]
