"""
Dataset loading, vocabulary inference and temporal context windows
"""

import csv
import ipaddress
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from lawmine.config.loader import read_toml
from lawmine.errors import (
    ConfigurationError,
    DatasetIoError,
    DatasetTooShort,
    DomainViolation,
    EmptyDataset,
    HeaderMismatch,
    MalformedRow,
)
from lawmine.language.terms import Bias, Kind, Value, Variable, Vocabulary, is_numeric, normalize_value, value_sort_key
from lawmine.services.logger_service import get_logger, log_execution_time

logger = get_logger("ingest")

CSV_GENERIC = "csv-generic"
CSV_NETFLOW = "csv-netflow"
FORMATS = (CSV_GENERIC, CSV_NETFLOW)

NETFLOW_COLUMNS = ("Proto", "SrcIp", "DstIp", "SrcPort", "DstPort", "Packets", "Bytes", "Flags", "Timestamp")

# nfdump-style compact flag strings such as ".AP.SF"
_FLAG_LETTERS = {"U": "URG", "A": "ACK", "P": "PSH", "R": "RST", "S": "SYN", "F": "FIN", "E": "ECE", "C": "CWR"}
_NUMBER = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable table of normalized cells (int, Fraction, str or None)"""

    frame: pd.DataFrame
    schema: Tuple[Variable, ...] = ()
    source: Optional[str] = field(default=None, compare=False)

    @classmethod
    def from_rows(cls, rows: Iterable[Mapping[str, Any]], columns: Optional[Sequence[str]] = None) -> "Dataset":
        rows = list(rows)
        if columns is None:
            columns = []
            for row in rows:
                columns.extend(name for name in row if name not in columns)
        data = {name: [normalize_value(row.get(name)) for row in rows] for name in columns}
        return cls(pd.DataFrame(data, columns=list(columns), dtype=object))

    @classmethod
    def from_frame(cls, frame: pd.DataFrame) -> "Dataset":
        data = {name: [normalize_value(v) for v in frame[name].tolist()] for name in frame.columns}
        return cls(pd.DataFrame(data, columns=list(frame.columns), dtype=object))

    @property
    def row_count(self) -> int:
        return len(self.frame)

    @property
    def columns(self) -> Tuple[str, ...]:
        return tuple(self.frame.columns)

    def __len__(self) -> int:
        return self.row_count

    def row(self, index: int) -> Dict[str, Value]:
        return {name: _none(value) for name, value in self.frame.iloc[index].items()}

    @property
    def rows(self) -> Iterator[Dict[str, Value]]:
        for record in self.frame.itertuples(index=False, name=None):
            yield {name: _none(value) for name, value in zip(self.frame.columns, record)}

    def column(self, name: str) -> List[Optional[Value]]:
        return [_none(v) for v in self.frame[name].tolist()]

    def take(self, indices: Sequence[int]) -> "Dataset":
        frame = self.frame.iloc[list(indices)].reset_index(drop=True)
        return Dataset(frame, self.schema, self.source)

    def with_schema(self, vocab: Vocabulary) -> "Dataset":
        return Dataset(self.frame, tuple(vocab.variables), self.source)

    def to_csv(self, path: Union[str, Path]) -> None:
        """Write with a header; Fractions are written as decimals when exact, else as p/q"""
        frame = self.frame.apply(lambda col: col.map(_render_cell))
        frame.to_csv(path, index=False, lineterminator="\n")


def _none(value: Any) -> Any:
    return None if value is None or (isinstance(value, float) and value != value) else value


def _render_cell(value: Any) -> str:
    value = _none(value)
    if value is None:
        return ""
    if isinstance(value, Fraction):
        return str(float(value)) if Fraction(str(float(value))) == value else f"{value.numerator}/{value.denominator}"
    return str(value)


def _parse_number(text: str) -> Value:
    text = text.strip()
    if re.fullmatch(r"[+-]?\d+", text):
        return int(text)
    return normalize_value(Fraction(text))


def _numeric_column(series: pd.Series) -> pd.Series:
    """Exact numbers when every non-empty cell parses as one, else the original strings"""
    present = series.dropna()
    converted = pd.to_numeric(present, errors="coerce")
    if len(present) and converted.notna().all() and all(_NUMBER.match(str(s).strip()) for s in present):
        return pd.Series([None if s is None else _parse_number(s) for s in series], index=series.index, dtype=object)
    return series


def _read_csv(path: Path) -> pd.DataFrame:
    try:
        with path.open("r", encoding="utf-8", newline="") as f:
            reader = csv.reader(f)
            try:
                header = next(reader)
            except StopIteration:
                raise HeaderMismatch(f"{path} is empty; a header row is required", {"path": str(path)}) from None
            header = [h.strip() for h in header]
            if not header or any(not h for h in header):
                raise HeaderMismatch(f"{path} has an empty column name in its header", {"path": str(path)})
            if len(set(header)) != len(header):
                raise HeaderMismatch(f"{path} has duplicate column names", {"path": str(path)})
            records = []
            for record in reader:
                if not record:
                    continue
                if len(record) != len(header):
                    raise MalformedRow(reader.line_num, len(header), len(record))
                records.append([cell if cell != "" else None for cell in record])
    except UnicodeDecodeError as e:
        raise DatasetIoError(f"{path} is not UTF-8: {e}", {"path": str(path)}) from e
    except OSError as e:
        raise DatasetIoError(f"cannot read {path}: {e}", {"path": str(path)}) from e
    return pd.DataFrame(records, columns=header, dtype=object)


def ip_class(address: str) -> str:
    """Class tag of an IP address; unparseable cells are returned unchanged"""
    try:
        ip = ipaddress.ip_address(address.strip())
    except ValueError:
        return address
    if ip.is_unspecified:
        return "unspecified"
    if ip.is_loopback:
        return "loopback"
    if ip.is_multicast:
        return "multicast"
    if ip.version == 4 and (ip == ipaddress.IPv4Address("255.255.255.255") or str(ip).endswith(".255")):
        return "broadcast"
    if ip.is_private:
        return "private"
    return "public"


def parse_flags(cell: Optional[str]) -> Optional[frozenset]:
    if cell is None:
        return None
    text = str(cell).strip()
    if not text:
        return frozenset()
    if "." in text and re.fullmatch(r"[.UAPRSFEC]+", text):
        return frozenset(_FLAG_LETTERS[ch] for ch in text if ch != ".")
    return frozenset(part.strip().upper() for part in re.split(r"[,|\s]+", text) if part.strip())


def _timestamp(cell: Optional[str]) -> Optional[int]:
    if cell is None:
        return None
    if _NUMBER.match(cell.strip()):
        return int(Fraction(cell.strip()))
    stamp = pd.to_datetime(cell, utc=True, errors="coerce")
    if pd.isna(stamp):
        return None
    return int(stamp.timestamp())


def _apply_netflow_profile(frame: pd.DataFrame, path: Path) -> pd.DataFrame:
    missing = [c for c in NETFLOW_COLUMNS if c not in frame.columns]
    if missing:
        raise HeaderMismatch(f"{path} lacks netflow columns {missing}", {"missing": missing})

    frame = frame.copy()
    for column in ("SrcIp", "DstIp"):
        frame[column] = pd.Series(
            [None if cell is None else ip_class(cell) for cell in frame[column].tolist()], index=frame.index, dtype=object
        )

    raw = frame["Timestamp"].tolist()
    stamps = [_timestamp(cell) for cell in raw]
    unparsed = sum(1 for cell, stamp in zip(raw, stamps) if cell is not None and stamp is None)
    if unparsed:
        logger.warning(f"Unparseable timestamps set to null - count: {unparsed}", path=str(path))
    frame["Timestamp"] = pd.Series(stamps, index=frame.index, dtype=object)

    flag_sets = [parse_flags(cell) for cell in frame["Flags"].tolist()]
    names = sorted({flag for flags in flag_sets if flags for flag in flags})
    position = frame.columns.get_loc("Flags")
    frame = frame.drop(columns=["Flags"])
    for offset, name in enumerate(names):
        cells = [None if flags is None else int(name in flags) for flags in flag_sets]
        frame.insert(position + offset, f"Flags_{name}", pd.Series(cells, index=frame.index, dtype=object))
    return frame


@log_execution_time("ingest.load")
def load_dataset(path: Union[str, Path], fmt: str = CSV_GENERIC) -> Dataset:
    """Read a headed CSV into a Dataset; no domains are inferred yet"""
    if fmt not in FORMATS:
        raise ConfigurationError(f"unknown dataset format {fmt!r}; expected one of {FORMATS}")
    path = Path(path)
    if not path.is_file():
        raise DatasetIoError(f"dataset {path} does not exist", {"path": str(path)})

    frame = _read_csv(path)
    if fmt == CSV_NETFLOW:
        frame = _apply_netflow_profile(frame, path)
    for column in frame.columns:
        if frame[column].map(lambda v: isinstance(v, str)).any():
            frame[column] = _numeric_column(frame[column])

    logger.info(f"Dataset loaded - path: {path}, rows: {len(frame)}, columns: {len(frame.columns)}", format=fmt)
    return Dataset(frame.reset_index(drop=True), source=str(path))


def _observed(d: Dataset, name: str) -> List[Value]:
    return [v for v in d.column(name) if v is not None]


def infer_vocabulary(d: Dataset, bias: Optional[Bias] = None) -> Vocabulary:
    """Kinds and domains from observed cells, bias overrides and exclusions applied"""
    bias = bias or Bias()
    if d.row_count == 0:
        raise EmptyDataset("cannot infer a vocabulary from an empty dataset")
    bias.check_names(d.columns)

    variables = []
    for name in d.columns:
        if name in bias.excluded_variables:
            continue
        observed = _observed(d, name)
        override = bias.domain_overrides.get(name)
        if override is not None:
            for value in observed:
                if not override.contains(override.coerce(value)):
                    raise DomainViolation(f"observed {value!r} lies outside the declared domain of {name}", name)
            variables.append(override)
            continue
        if not observed:
            logger.warning(f"Column has no values and no declared domain, dropped - column: {name}")
            continue

        distinct = sorted(set(observed), key=value_sort_key)
        numeric = all(is_numeric(v) for v in distinct)
        if not numeric:
            variables.append(Variable(name, Kind.NOMINAL, tuple(distinct)))
        elif name in bias.nominal and len(distinct) <= bias.nominal_threshold:
            variables.append(Variable(name, Kind.NOMINAL, tuple(distinct)))
        else:
            if name in bias.nominal:
                logger.warning(
                    f"Column kept ordinal, too many distinct values - column: {name}, distinct: {len(distinct)}",
                    threshold=bias.nominal_threshold,
                )
            variables.append(Variable(name, Kind.ORDINAL, low=distinct[0], high=distinct[-1]))

    vocab = Vocabulary(tuple(variables))
    logger.debug(
        "Vocabulary inferred",
        nominal=sum(v.is_nominal for v in vocab),
        ordinal=sum(not v.is_nominal for v in vocab),
    )
    return vocab


@dataclass(frozen=True)
class WindowSpec:
    length: int = 4
    stride: int = 2
    aggregates: Tuple[Tuple[str, str], ...] = ()

    def __post_init__(self):
        if self.length < 1 or self.stride < 1:
            raise ConfigurationError(f"window length and stride must be positive, got {self.length}/{self.stride}")
        if self.stride > self.length:
            raise ConfigurationError(f"window stride {self.stride} exceeds length {self.length}")
        for source, reduction in self.aggregates:
            if reduction != "sum":
                raise ConfigurationError(f"unsupported aggregate {reduction!r} on {source}; only 'sum' is available")

    def to_dict(self) -> Dict[str, Any]:
        return {"length": self.length, "stride": self.stride, "aggregates": [list(a) for a in self.aggregates]}

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "WindowSpec":
        aggregates = []
        for item in data.get("aggregates", []):
            if isinstance(item, str):
                aggregates.append((item, "sum"))
            else:
                source, reduction = item
                aggregates.append((str(source), str(reduction)))
        try:
            return cls(int(data.get("length", 4)), int(data.get("stride", 2)), tuple(aggregates))
        except (TypeError, ValueError) as e:
            raise ConfigurationError(f"invalid window specification: {e}") from e


def window_starts(row_count: int, spec: WindowSpec) -> np.ndarray:
    return np.arange(0, row_count - spec.length + 1, spec.stride)


def _window_sum(cells: Sequence[Optional[Value]]) -> Optional[Value]:
    present = [c for c in cells if c is not None]
    if not present:
        return None
    return normalize_value(sum(Fraction(c) for c in present))


@log_execution_time("ingest.windowize")
def windowize(d: Dataset, spec: WindowSpec) -> Dataset:
    """Concatenate `length` consecutive rows into one; variable v becomes v_1..v_length"""
    if d.row_count < spec.length:
        raise DatasetTooShort(
            f"dataset has {d.row_count} rows, window needs {spec.length}",
            {"rows": d.row_count, "length": spec.length},
        )
    for source, _ in spec.aggregates:
        if source not in d.columns:
            raise ConfigurationError(f"aggregate source {source!r} is not a column")

    starts = window_starts(d.row_count, spec)
    parts = []
    for j in range(spec.length):
        block = d.frame.iloc[starts + j].reset_index(drop=True)
        parts.append(block.rename(columns={c: f"{c}_{j + 1}" for c in d.columns}))
    windows = pd.concat(parts, axis=1)

    for source, reduction in spec.aggregates:
        values = d.frame[source].tolist()
        sums = []
        for start in starts:
            cells = [_none(v) for v in values[start : start + spec.length]]
            if any(isinstance(c, str) for c in cells):
                raise ConfigurationError(f"aggregate source {source!r} is not numeric")
            sums.append(_window_sum(cells))
        windows[f"{source}_{reduction}"] = pd.Series(sums, dtype=object)

    logger.info(
        f"Windows built - rows: {d.row_count}, windows: {len(starts)}",
        length=spec.length,
        stride=spec.stride,
    )
    return Dataset(windows.astype(object), source=d.source)


def load_bias_file(
    path: Union[str, Path],
    arity_limit: Optional[int] = None,
    nominal_threshold: Optional[int] = None,
) -> Tuple[Bias, Optional[WindowSpec]]:
    """Bias and optional window spec from a TOML file"""
    data = read_toml(path)
    bias = Bias.from_mapping(data, arity_limit=arity_limit, nominal_threshold=nominal_threshold)
    window = WindowSpec.from_mapping(data["windows"]) if "windows" in data else None
    if window is not None and window.aggregates and not bias.enable_aggregates:
        logger.warning("Window aggregates ignored, enable_aggregates is false", path=str(path))
        window = WindowSpec(window.length, window.stride, ())
    return bias, window
