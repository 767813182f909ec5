"""Deterministic CSV/JSON writers shared by the CLI.

CSV dialect: RFC 4180 (CRLF rows, minimal quoting), '.' decimal, UTF-8, one
mandatory header row.  Every file starts with '#'-prefixed comment lines
embedding the resolved configuration and the code version, so identical
config and seed reproduce byte-identical outputs.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable

from . import __version__


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def header_comments(config_dict: dict) -> list:
    return [
        f"# cascade-market {__version__}",
        "# config: " + json.dumps(config_dict, sort_keys=True, separators=(",", ":")),
    ]


def write_csv(path, columns: Iterable, rows: Iterable, config_dict: dict) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        for line in header_comments(config_dict):
            fh.write(line + "\r\n")
        writer = csv.writer(fh)
        writer.writerow(list(columns))
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def write_json(path, payload: dict, config_dict: dict) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = {"version": __version__, "config": config_dict, **payload}
    path.write_text(json.dumps(body, sort_keys=True, indent=2) + "\n", encoding="utf-8")
