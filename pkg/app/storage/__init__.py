from .chbf import (
    decode_field,
    encode_field,
    read_field,
    read_series,
    read_snapshot,
    series_path,
    write_series,
    write_snapshot,
)
from .csv_log import CsvLog, read_csv
from .main import RunStorage
from .utils import generate_unique_run_name

__all__ = [
    "RunStorage",
    "CsvLog",
    "read_csv",
    "generate_unique_run_name",
    "encode_field",
    "decode_field",
    "write_snapshot",
    "read_snapshot",
    "read_field",
    "series_path",
    "write_series",
    "read_series",
]
