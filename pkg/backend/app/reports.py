from __future__ import annotations

import enum
import json
import math
from io import StringIO
from pathlib import Path
from typing import Any

import pandas as pd

from .settings import settings


class OutputFormat(str, enum.Enum):
    CSV = "csv"
    JSON = "json"


def _clean(value: Any) -> Any:
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean(v) for v in value]
    if hasattr(value, "item"):
        return _clean(value.item())
    return value


def render_csv(frame: pd.DataFrame) -> str:
    """Header row plus rows with floats in fixed scientific notation (17 significant digits by default)."""
    buf = StringIO()
    frame.to_csv(buf, index=False, float_format=settings.csv_float_format, na_rep="", lineterminator="\n")
    return buf.getvalue()


def render_json(payload: Any) -> str:
    return json.dumps(_clean(payload), indent=2, allow_nan=False) + "\n"


def render_frame(frame: pd.DataFrame, fmt: OutputFormat) -> str:
    if fmt == OutputFormat.CSV:
        return render_csv(frame)
    return render_json(frame.to_dict(orient="records"))


def render_record(record: dict[str, Any], fmt: OutputFormat) -> str:
    if fmt == OutputFormat.CSV:
        return render_csv(pd.DataFrame([record]))
    return render_json(record)


def write_output(text: str, out: Path | None) -> None:
    if out is None:
        print(text, end="")
        return
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text, encoding="utf-8")
