"""Report assembly and serialization (human table, CSV, JSON).

Reports embed the seed, a hash of the resolved configuration and the package
version, and contain nothing run-dependent beyond that, so two runs with
equal configuration are byte-identical.
"""

import hashlib
import json
from dataclasses import dataclass, field

from . import __version__


def config_hash(config):
    """Short stable hash of a configuration mapping."""
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode()).hexdigest()[:12]


def metadata(seed, config):
    return {"seed": seed, "config_hash": config_hash(config), "version": __version__}


@dataclass
class Report:
    """One command's results: scalar quantities plus optional tables."""

    command: str
    meta: dict
    scalars: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)
    notes: tuple = ()


def _fmt(value):
    """Lossless text form of a report value."""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return ""
    return str(value)


def render_table(report):
    lines = [f"== {report.command} =="]
    for key, value in report.meta.items():
        lines.append(f"  {key}: {_fmt(value)}")
    if report.scalars:
        lines.append("")
        width = max(len(k) for k in report.scalars)
        for key, value in report.scalars.items():
            lines.append(f"  {key:<{width}}  {_fmt(value)}")
    for name, table in report.tables.items():
        lines.append("")
        lines.append(f"-- {name} --")
        columns = table["columns"]
        rows = [[_fmt(cell) for cell in row] for row in table["rows"]]
        widths = [
            max(len(col), *(len(row[i]) for row in rows)) if rows else len(col)
            for i, col in enumerate(columns)
        ]
        lines.append("  " + "  ".join(col.ljust(w) for col, w in zip(columns, widths)))
        for row in rows:
            lines.append("  " + "  ".join(cell.ljust(w) for cell, w in zip(row, widths)))
    for note in report.notes:
        lines.append("")
        lines.append(f"note: {note}")
    return "\n".join(lines) + "\n"


def render_csv(report):
    lines = [f"# command,{report.command}"]
    for key, value in report.meta.items():
        lines.append(f"# {key},{_fmt(value)}")
    if report.scalars:
        lines.append("quantity,value")
        for key, value in report.scalars.items():
            lines.append(f"{key},{_fmt(value)}")
    for name, table in report.tables.items():
        lines.append("")
        lines.append(f"# table,{name}")
        lines.append(",".join(table["columns"]))
        for row in table["rows"]:
            lines.append(",".join(_fmt(cell) for cell in row))
    for note in report.notes:
        lines.append(f"# note,{note}")
    return "\n".join(lines) + "\n"


def render_json(report):
    payload = {
        "command": report.command,
        "meta": report.meta,
        "results": report.scalars,
        "tables": report.tables,
        "notes": list(report.notes),
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


RENDERERS = {"table": render_table, "csv": render_csv, "json": render_json}


def render(report, fmt):
    try:
        renderer = RENDERERS[fmt]
    except KeyError:
        raise ValueError(f"unknown output format {fmt!r}") from None
    return renderer(report)
