"""Preset golden table and config round-trip checks (shared by tests)."""

import os

from recipekit import configfmt
from recipekit.recipes import PRESET_NAMES, deserialize, preset, serialize

GOLDEN = os.path.join(os.path.dirname(os.path.abspath(__file__)), "golden", "presets.tsv")


def golden_rows():
    with open(GOLDEN, encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("#") or not line.strip():
                continue
            name, key, value = line.rstrip("\n").split("\t")
            yield name, key, value


def golden_mismatches():
    bad = []
    for name, key, value in golden_rows():
        got = configfmt.format_value(configfmt.get_path(preset(name), key))
        if got != value:
            bad.append((name, key, value, got))
    return bad


def roundtrip_failures():
    bad = []
    for name in PRESET_NAMES:
        r = preset(name)
        text = serialize(r)
        if deserialize(text) != r or serialize(deserialize(text)) != text:
            bad.append(name)
    return bad
