# (C) Copyright 2024- spinstab developers.
#
# This software is licensed under the terms of the Apache Licence Version 2.0
# which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.

import json

from ruamel.yaml import YAML
from ruamel.yaml.compat import StringIO
from ruamel.yaml.error import MarkedYAMLError

from .errors import ConfigError

__all__ = ["parse_yaml_file", "parse_yaml_str", "to_yaml_str", "source_line"]


def parse_yaml_str(text, filepath=None):
    try:
        return YAML().load(text)
    except MarkedYAMLError as e:
        line = e.problem_mark.line + 1 if e.problem_mark else None
        raise ConfigError(e.problem or "malformed YAML", line=line, path=filepath)


def parse_yaml_file(filepath):
    """
    Load a YAML experiment file. ``.json`` files must be strict JSON and are
    then loaded through the YAML parser, which keeps their line numbers.
    """
    with open(filepath, "r") as f:
        text = f.read()
    if str(filepath).endswith(".json"):
        try:
            json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(e.msg, line=e.lineno, path=filepath)
    return parse_yaml_str(text, filepath)


def to_yaml_str(config):
    ostream = StringIO()
    YAML().dump(config, ostream)
    return ostream.getvalue()


def source_line(node, key=None):
    """
    1-based source line of ``node[key]`` (or of ``node``) when the node was
    loaded by the round-trip parser.
    """
    lc = getattr(node, "lc", None)
    if lc is None:
        return None
    try:
        if key is None:
            return lc.line + 1
        if isinstance(key, int):
            return lc.item(key)[0] + 1
        return lc.key(key)[0] + 1
    except (KeyError, IndexError, TypeError, AttributeError):
        return lc.line + 1
