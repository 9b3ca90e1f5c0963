from foukit.io.series import (
    FIXTURES,
    SeriesFile,
    fixture_file,
    fixture_location,
    list_fixtures,
    load_fixture,
    read_path_csv,
    resolve_series,
    write_atomic,
    write_path_csv,
)

__all__ = [
    "FIXTURES",
    "SeriesFile",
    "fixture_file",
    "fixture_location",
    "list_fixtures",
    "load_fixture",
    "read_path_csv",
    "resolve_series",
    "write_atomic",
    "write_path_csv",
]
