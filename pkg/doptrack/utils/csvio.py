from pathlib import Path
from typing import Union

import pandas as pd

PathLike = Union[str, Path]


def write_csv(df: pd.DataFrame, path: PathLike) -> None:
    """
    Write a table with a header row, '.' decimals and LF line endings.

    Floats are written with the shortest repr that round-trips, so
    :func:`read_csv` gives back exactly the same values.
    """
    df.to_csv(path, index=False, lineterminator="\n")


def read_csv(path: PathLike) -> pd.DataFrame:
    return pd.read_csv(path, float_precision="round_trip")
