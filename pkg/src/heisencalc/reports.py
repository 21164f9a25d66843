"""Deterministic structured reports: a '#'-prefixed metadata block, one
fixed header row, then tab-separated records.  Floats are written with
'%.17g' so identical runs produce byte-identical files.
"""

from __future__ import annotations

from pathlib import Path


def format_value(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return format(v, ".17g")
    if isinstance(v, complex):
        return f"{format(v.real, '.17g')}{'+' if v.imag >= 0 else '-'}{format(abs(v.imag), '.17g')}j"
    return str(v)


def write_report(path, meta: dict, header, rows) -> Path:
    """Write metadata + table; returns the path."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# {k}\t{format_value(v)}" for k, v in meta.items()]
    lines.append("\t".join(str(h) for h in header))
    for row in rows:
        lines.append("\t".join(format_value(v) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_columns(path, names, columns) -> Path:
    """Plain numeric table for external plotting (two/three columns)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["\t".join(names)]
    for row in zip(*columns):
        lines.append("\t".join(format_value(float(v)) for v in row))
    path.write_text("\n".join(lines) + "\n")
    return path
