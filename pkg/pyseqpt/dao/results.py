"""Data access object for result tables"""
from io import StringIO
from typing import Any, List, Optional

import pandas as pd

from pyseqpt.dao.serialize import to_json, write_text


def records_frame(records: List[dict]) -> pd.DataFrame:
    """DataFrame with every complex column split into <name>_re and <name>_im"""
    frame = pd.DataFrame(records)
    for column in list(frame.columns):
        if frame[column].map(lambda v: isinstance(v, complex)).any():
            position = frame.columns.get_loc(column)
            values = frame.pop(column).map(complex)
            frame.insert(position, f"{column}_im", values.map(lambda v: v.imag))
            frame.insert(position, f"{column}_re", values.map(lambda v: v.real))
    return frame


def write_records(
    records: List[dict], path: Optional[str], fmt: str = "json", document: Any = None
) -> str:
    """
    Write result rows as CSV, or `document` (default: the rows) as JSON.

    Complex values in JSON rows become [re, im].
    """
    if fmt == "csv":
        buffer = StringIO()
        records_frame(records).to_csv(buffer, index=False)
        return write_text(buffer.getvalue(), path)
    if document is None:
        document = [
            {k: [v.real, v.imag] if isinstance(v, complex) else v for k, v in row.items()}
            for row in records
        ]
    return write_text(to_json(document), path)
