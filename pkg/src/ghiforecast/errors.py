"""Exception hierarchy.

The CLI maps the three top-level families onto exit codes: ConfigError -> 2,
DataError -> 3, NumericError -> 4.
"""


class ForecastError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(ForecastError):
    pass


class DataError(ForecastError):
    pass


class NumericError(ForecastError):
    pass


# --- ingest -----------------------------------------------------------------


class MalformedHeader(DataError):
    pass


class RowArity(DataError):
    def __init__(self, line_no: int, expected: int, got: int):
        super().__init__(f"line {line_no}: expected {expected} tokens, got {got}")
        self.line_no = line_no
        self.expected = expected
        self.got = got


class BadNumber(DataError):
    def __init__(self, line_no: int, col: int, token: str):
        super().__init__(f"line {line_no}, column {col}: cannot parse {token!r}")
        self.line_no = line_no
        self.col = col
        self.token = token


class MissingData(DataError):
    def __init__(self, station: str, year: int, detail: str = ""):
        msg = f"no data files for station {station!r}, year {year}"
        super().__init__(msg + (f" ({detail})" if detail else ""))
        self.station = station
        self.year = year


class DuplicateTimestamp(DataError):
    pass


class NetworkError(DataError):
    def __init__(self, failures: dict):
        names = ", ".join(sorted(failures))
        super().__init__(f"{len(failures)} file(s) unavailable: {names}")
        self.failures = failures


# --- preprocess ---------------------------------------------------------------


class EmptyAfterClean(DataError):
    pass


class InsufficientRows(DataError):
    pass


class NoSuchMonth(DataError):
    pass


# --- importance / models / ga ------------------------------------------------


class EmptyFrame(DataError):
    pass


class UnknownStation(ConfigError, KeyError):
    pass


class KTooLarge(ConfigError):
    pass


class FeatureMismatch(DataError):
    pass


class BadBounds(ConfigError):
    pass


class SchemaMismatch(ConfigError):
    pass


class RankDeficientWarning(UserWarning):
    """Least squares design matrix lost rank; a minimum-norm solution is used."""


# --- metrics ----------------------------------------------------------------


class LengthMismatch(NumericError):
    pass


class EmptyInput(NumericError):
    pass


class ZeroVariance(NumericError):
    pass


class ZeroMean(NumericError):
    pass
