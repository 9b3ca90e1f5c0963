"""Reading observed series, sample-path CSV files and the bundled fixtures."""

import io
import logging
from importlib import resources
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Union

import numpy as np
import pandas as pd
from scipy import signal

from foukit.errors import DataError, DomainError
from foukit.simcore.sampler import SamplePath

logger = logging.getLogger(__name__)

SERIES_FORMATS = ("auto", "single-column", "time-value")
MIN_SERIES_LENGTH = 8
FIXTURE_PREFIX = "fixture:"

FIXTURE_PACKAGE = "foukit.data.series"


@dataclass(frozen=True)
class SeriesFile:
    """
    A CSV file holding one observed series.

    "single-column" files hold the values; "time-value" files hold a time
    column followed by the values. "auto" decides by the column count. A
    non-numeric first row is taken as a header.
    """

    path: Path
    format: str = "auto"
    detrend: bool = False

    def __post_init__(self):
        object.__setattr__(self, "path", Path(self.path))
        if self.format not in SERIES_FORMATS:
            raise DomainError(f"format must be one of {SERIES_FORMATS}, got {self.format!r}")

    def read(self) -> np.ndarray:
        """
        Parse the file into a float array, detrended if requested.

        Raises:
            DataError: If the file is missing, malformed or has fewer than
                8 finite values
        """
        if not self.path.exists():
            raise DataError(f"series file not found: {self.path}")
        try:
            frame = pd.read_csv(self.path, header=None, comment="#", skipinitialspace=True)
        except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as err:
            raise DataError(f"cannot parse {self.path}: {err}") from err

        numeric = frame.apply(pd.to_numeric, errors="coerce")
        if numeric.iloc[0].isna().all():
            numeric = numeric.iloc[1:]

        columns = numeric.shape[1]
        fmt = self.format
        if fmt == "auto":
            fmt = "single-column" if columns == 1 else "time-value"
        if fmt == "single-column" and columns != 1:
            raise DataError(f"{self.path} has {columns} columns, expected one")
        if fmt == "time-value" and columns < 2:
            raise DataError(f"{self.path} has one column, expected time and value")

        values = numeric.iloc[:, 0 if fmt == "single-column" else 1].to_numpy(dtype=float)
        bad = np.flatnonzero(~np.isfinite(values))
        if bad.size:
            raise DataError(f"{self.path}: non-numeric or non-finite values at data rows {bad[:5].tolist()}")
        if values.size < MIN_SERIES_LENGTH:
            raise DataError(
                f"{self.path}: {values.size} values, at least {MIN_SERIES_LENGTH} are needed"
            )
        if self.detrend:
            values = signal.detrend(values, type="linear")
        return values

    def to_path(self, horizon: float) -> SamplePath:
        """The series placed on [0, horizon]."""
        return SamplePath(self.read(), horizon)


@dataclass(frozen=True)
class FixtureInfo:
    file_name: str
    description: str
    detrend: bool = False


# Bundled fixtures
FIXTURES: Dict[str, FixtureInfo] = {
    "series_a": FixtureInfo(
        "series_a.csv",
        "Box-Jenkins Series A: 197 chemical process concentration readings, every two hours",
    ),
    "lake_huron": FixtureInfo(
        "lake_huron.csv",
        "Lake Huron annual mean level in feet, 1875-1972 (98 values), linear trend removed",
        detrend=True,
    ),
}


def fixture_location(file_name: str) -> Path:
    """Filesystem path of a data file shipped in the foukit.data.series package."""
    return Path(str(resources.files(FIXTURE_PACKAGE).joinpath(file_name)))


def fixture_file(name: str) -> SeriesFile:
    """
    SeriesFile of a bundled fixture, with its documented preprocessing.

    Raises:
        DataError: If the name is unknown
    """
    if name not in FIXTURES:
        available = ", ".join(FIXTURES)
        raise DataError(f"Fixture '{name}' not found. Available: {available}")
    info = FIXTURES[name]
    return SeriesFile(fixture_location(info.file_name), detrend=info.detrend)


def load_fixture(name: str) -> np.ndarray:
    return fixture_file(name).read()


def list_fixtures() -> List[Dict[str, str]]:
    return [
        {"id": key, "file": info.file_name, "description": info.description}
        for key, info in FIXTURES.items()
    ]


def resolve_series(source: Union[str, Path], detrend: bool = False, fmt: str = "auto") -> SeriesFile:
    """
    Resolve "fixture:<name>" or a file path.

    A fixture keeps its own preprocessing; detrend=True adds linear
    detrending to the others.
    """
    text = str(source)
    if text.startswith(FIXTURE_PREFIX):
        fixture = fixture_file(text[len(FIXTURE_PREFIX) :])
        if detrend and not fixture.detrend:
            return SeriesFile(fixture.path, fixture.format, True)
        return fixture
    return SeriesFile(Path(text), fmt, detrend)


def path_to_csv(path: SamplePath) -> str:
    """CSV text with header t,x and rows iΔ,X_i in round-trip precision."""
    buffer = io.StringIO()
    path.to_frame().to_csv(buffer, index=False, float_format="%.17g", lineterminator="\n")
    return buffer.getvalue()


def write_path_csv(path: SamplePath, target: Union[str, Path]) -> Path:
    return write_atomic(target, path_to_csv(path))


def read_path_csv(source: Union[str, Path]) -> SamplePath:
    """
    Read a t,x file written by write_path_csv.

    The horizon is the last time stamp.

    Raises:
        DataError: If the columns are missing or the times are not iΔ
    """
    source = Path(source)
    try:
        frame = pd.read_csv(source, float_precision="round_trip")
    except FileNotFoundError as err:
        raise DataError(f"path file not found: {source}") from err
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as err:
        raise DataError(f"cannot parse {source}: {err}") from err
    if list(frame.columns[:2]) != ["t", "x"]:
        raise DataError(f"{source} must have columns t,x, got {list(frame.columns)}")
    times = frame["t"].to_numpy(dtype=float)
    values = frame["x"].to_numpy(dtype=float)
    if times.size < 2:
        raise DataError(f"{source} holds fewer than 2 rows")
    horizon = float(times[-1])
    expected = np.arange(1, times.size + 1) * (horizon / times.size)
    if not np.allclose(times, expected, rtol=1e-12, atol=0.0):
        raise DataError(f"{source}: times are not equispaced at iT/n")
    return SamplePath(values, horizon)


def write_atomic(target: Union[str, Path], text: str) -> Path:
    """
    Write text through a temporary file in the same directory and rename it.

    Readers never see a partial file, and a failure leaves no output.
    """
    target = Path(target)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp_name, target)
    except BaseException:
        Path(tmp_name).unlink(missing_ok=True)
        raise
    logger.debug("Wrote %s", target)
    return target
