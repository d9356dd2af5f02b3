"""Self-describing CSV and JSON reports.

Both formats embed the resolved config.  The wall-clock timestamp lives only
in the JSON ``metadata`` block, so the data sections of two runs with the same
config are byte-identical.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass, field


def _clean(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None if math.isnan(v) else ("inf" if v > 0 else "-inf")
    if isinstance(v, complex):
        return [_clean(v.real), _clean(v.imag)]
    if isinstance(v, dict):
        return {k: _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if hasattr(v, "item"):
        return _clean(v.item())
    return v


@dataclass
class Report:
    """Rows of one subcommand run plus its config and aggregate block."""

    command: str
    config: dict
    columns: list[str] = field(default_factory=list)
    rows: list[list] = field(default_factory=list)
    aggregate: dict = field(default_factory=dict)

    def add(self, *row) -> None:
        self.rows.append(list(row))

    def to_json(self, timestamp: float | None = None) -> str:
        body = {
            "command": self.command,
            "config": _clean(self.config),
            "columns": self.columns,
            "data": _clean(self.rows),
            "aggregate": _clean(self.aggregate),
            "metadata": {"timestamp": time.time() if timestamp is None else timestamp},
        }
        return json.dumps(body, indent=2) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# command={self.command}\n")
        for k, v in _clean(self.config).items():
            buf.write(f"# config {k}={json.dumps(v)}\n")
        for k, v in _clean(self.aggregate).items():
            buf.write(f"# aggregate {k}={json.dumps(v)}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([repr(c) if isinstance(c, float) else c for c in _clean(row)])
        return buf.getvalue()

    def render(self, fmt: str) -> str:
        if fmt == "json":
            return self.to_json()
        if fmt == "csv":
            return self.to_csv()
        raise ValueError(f"format must be json or csv, got {fmt!r}")
