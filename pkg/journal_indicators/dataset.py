"""
Reading citation and summary files, writing result tables.

File formats
------------
citations:  header ``journal_id,paper_id,citations``, one row per paper.
summary:    header ``id,name,n_papers,m,v[,mu,sigma]``; extra columns are
            ignored, blank mu/sigma are derived from (m, v).

Leading lines starting with ``#`` are skipped in both, so a csv written by
write_results can be read back. Line numbers in errors count from 1 and
include those lines.
"""

import enum
import io
import json
import logging
import math
import re
import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import List

import numpy as np
import pandas as pd

from .empirical import CitationVector
from .errors import (
    DatasetError,
    DomainError,
    DuplicateKeyError,
    InvariantViolationError,
    NegativeCitationError,
    OutputError,
    ParseError,
    SchemaError,
)
from .estimated import JournalRecord, id_key
from .lognormal import ArithMoments, LogMoments, arith_to_log

logger = logging.getLogger(__name__)

CITATION_COLUMNS = ["journal_id", "paper_id", "citations"]
SUMMARY_REQUIRED = ["id", "name", "n_papers", "m", "v"]
SUMMARY_OPTIONAL = ["mu", "sigma"]

BUNDLED_SUMMARY = "medical_journals.csv"

_INTEGER = re.compile(r"[+-]?\d+")
_TOKENIZER_LINE = re.compile(r"line (\d+)")


@dataclass(frozen=True)
class _Table:
    """Raw string cells plus the file line of the header row."""

    path: str
    frame: pd.DataFrame
    header_line: int

    def line_of(self, row_index):
        return self.header_line + 1 + row_index

    def column_of(self, name):
        return list(self.frame.columns).index(name) + 1


def _read_table(path, text=None):
    """Parse a comma-separated file into a frame of stripped strings."""
    shown = str(path)
    if text is None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except FileNotFoundError:
            raise DatasetError(shown, "file not found")
        except UnicodeDecodeError as e:
            raise ParseError(shown, f"not valid UTF-8: {e.reason}")
        except OSError as e:
            raise DatasetError(shown, f"cannot read file: {e.strerror}")

    lines = text.splitlines()
    skipped = 0
    while skipped < len(lines) and lines[skipped].startswith("#"):
        skipped += 1
    body = "\n".join(lines[skipped:])
    if not body.strip():
        raise SchemaError(shown, "missing header row", line=skipped + 1)

    try:
        frame = pd.read_csv(io.StringIO(body), dtype=str, keep_default_na=False,
                            skip_blank_lines=False, skipinitialspace=True)
    except pd.errors.ParserError as e:
        match = _TOKENIZER_LINE.search(str(e))
        line = int(match.group(1)) + skipped if match else None
        raise ParseError(shown, f"malformed row: {e}", line=line)

    frame.columns = [str(name).strip() for name in frame.columns]
    for name in frame.columns:
        frame[name] = frame[name].str.strip()
    return _Table(shown, frame, skipped + 1)


def _missing(value):
    return value is None or (isinstance(value, float) and math.isnan(value)) or value == ""


def _check_complete(table, columns):
    """Every listed cell must be present; reports the first gap."""
    for row_index, row in enumerate(table.frame[columns].itertuples(index=False)):
        if all(_missing(value) for value in row):
            raise ParseError(table.path, "blank row", line=table.line_of(row_index))
        for name, value in zip(columns, row):
            if _missing(value):
                raise ParseError(table.path, f"missing value for '{name}'",
                                 line=table.line_of(row_index), column=table.column_of(name))


def load_citations(path):
    """Per-journal citation vectors from a citations file, keyed in id order."""
    table = _read_table(path)
    frame = table.frame
    if list(frame.columns) != CITATION_COLUMNS:
        raise SchemaError(table.path, f"expected header {','.join(CITATION_COLUMNS)}, "
                                      f"got {','.join(frame.columns)}", line=table.header_line)
    if frame.empty:
        logger.warning(f"{table.path}: no citation rows")
        return {}
    _check_complete(table, CITATION_COLUMNS)

    column = table.column_of("citations")
    well_formed = frame["citations"].str.fullmatch(_INTEGER.pattern)
    if not well_formed.all():
        row_index = int(np.flatnonzero(~well_formed.to_numpy())[0])
        raise ParseError(table.path, f"citations must be an integer, got {frame['citations'].iloc[row_index]!r}",
                         line=table.line_of(row_index), column=column)
    counts = pd.to_numeric(frame["citations"]).astype(np.int64)
    if (counts < 0).any():
        row_index = int(np.flatnonzero(counts.to_numpy() < 0)[0])
        raise NegativeCitationError(table.path, f"negative citation count {counts.iloc[row_index]}",
                                    line=table.line_of(row_index), column=column)

    repeated = frame.duplicated(["journal_id", "paper_id"])
    if repeated.any():
        row_index = int(np.flatnonzero(repeated.to_numpy())[0])
        raise DuplicateKeyError(table.path,
                                f"duplicate paper {frame['paper_id'].iloc[row_index]!r} "
                                f"in journal {frame['journal_id'].iloc[row_index]!r}",
                                line=table.line_of(row_index), column=table.column_of("paper_id"))

    grouped = {
        jid: CitationVector(counts.loc[rows.index].to_numpy())
        for jid, rows in frame.groupby("journal_id", sort=False)
    }
    logger.info(f"{table.path}: {len(frame)} papers in {len(grouped)} journals")
    return {jid: grouped[jid] for jid in sorted(grouped, key=id_key)}


def _parse_int(table, row_index, name, text):
    if not _INTEGER.fullmatch(text):
        raise ParseError(table.path, f"{name} must be an integer, got {text!r}",
                         line=table.line_of(row_index), column=table.column_of(name))
    return int(text)


def _parse_float(table, row_index, name, text):
    try:
        value = float(text)
    except ValueError:
        value = math.nan
    if not math.isfinite(value):
        raise ParseError(table.path, f"{name} must be a finite number, got {text!r}",
                         line=table.line_of(row_index), column=table.column_of(name))
    return value


def load_summary(path=None):
    """Journal records from a summary file; the bundled table when path is None."""
    if path is None:
        text = resources.files(__package__).joinpath("data").joinpath(BUNDLED_SUMMARY).read_text(encoding="utf-8")
        table = _read_table(f"<bundled {BUNDLED_SUMMARY}>", text)
    else:
        table = _read_table(path)
    frame = table.frame

    missing = [name for name in SUMMARY_REQUIRED if name not in frame.columns]
    if missing:
        raise SchemaError(table.path, f"missing column(s): {', '.join(missing)}", line=table.header_line)
    has_log = [name for name in SUMMARY_OPTIONAL if name in frame.columns]
    if len(has_log) == 1:
        raise SchemaError(table.path, "columns mu and sigma must appear together", line=table.header_line)
    extra = [name for name in frame.columns if name not in SUMMARY_REQUIRED + SUMMARY_OPTIONAL]
    if extra:
        logger.debug(f"{table.path}: ignoring column(s) {', '.join(extra)}")
    if frame.empty:
        logger.warning(f"{table.path}: no journal rows")
        return []
    _check_complete(table, SUMMARY_REQUIRED)

    records: List[JournalRecord] = []
    seen = {}
    for row_index, row in enumerate(frame.to_dict("records")):
        line = table.line_of(row_index)
        jid = row["id"]
        if jid in seen:
            raise DuplicateKeyError(table.path, f"journal id {jid!r} already defined on line {seen[jid]}",
                                    line=line, column=table.column_of("id"))
        seen[jid] = line

        n_papers = _parse_int(table, row_index, "n_papers", row["n_papers"])
        m = _parse_float(table, row_index, "m", row["m"])
        v = _parse_float(table, row_index, "v", row["v"])
        mu_text = row.get("mu", "")
        sigma_text = row.get("sigma", "")
        if _missing(mu_text) != _missing(sigma_text):
            name = "mu" if _missing(mu_text) else "sigma"
            raise ParseError(table.path, "mu and sigma must both be given or both be blank",
                             line=line, column=table.column_of(name))

        try:
            arith = ArithMoments(m, v)
            arith.check()
            if _missing(mu_text):
                log, provenance = arith_to_log(arith), "derived"
            else:
                log = LogMoments(_parse_float(table, row_index, "mu", mu_text),
                                 _parse_float(table, row_index, "sigma", sigma_text))
                provenance = "measured"
            records.append(JournalRecord(jid, row["name"], n_papers, arith, log, provenance))
        except DomainError as e:
            raise InvariantViolationError(table.path, str(e), line=line)

    derived = sum(rec.log_provenance == "derived" for rec in records)
    logger.info(f"{table.path}: {len(records)} journals ({derived} with derived log moments)")
    return records


@dataclass
class SummaryTable:
    """Records as summary rows; with derived_columns the (m, v)-implied mu/sigma are added.

    mu/sigma stay blank for records whose log moments were derived, so the
    rows load back into the same records.
    """

    records: List[JournalRecord]
    derived_columns: bool = False

    def to_rows(self):
        rows = []
        for rec in self.records:
            measured = rec.log is not None and rec.log_provenance == "measured"
            row = {
                "id": rec.id,
                "name": rec.name,
                "n_papers": rec.n_papers,
                "m": rec.arith.m,
                "v": rec.arith.v,
                "mu": rec.log.mu_ln if measured else None,
                "sigma": rec.log.sigma_ln if measured else None,
            }
            if self.derived_columns:
                derived = arith_to_log(rec.arith)
                row["mu_derived"] = derived.mu_ln
                row["sigma_derived"] = derived.sigma_ln
            rows.append(row)
        return rows


def _collect(results):
    if hasattr(results, "to_rows"):
        header = results.header() if hasattr(results, "header") else None
        return header, list(results.to_rows())
    return None, list(results)


def _columns(rows):
    columns = []
    for row in rows:
        for key in row:
            if key not in columns:
                columns.append(key)
    return columns


def _plain(value):
    """Unwrap enums and numpy scalars."""
    if isinstance(value, enum.Enum):
        return value.value
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


def _csv_cell(value, precision):
    value = _plain(value)
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.{precision}g}"
    return str(value)


def _json_value(value, precision):
    value = _plain(value)
    if isinstance(value, float):
        return float(f"{value:.{precision}g}") if math.isfinite(value) else None
    return value


def render_results(results, fmt="csv", precision=6):
    """Results as text; the same input always gives the same text."""
    header, rows = _collect(results)
    columns = _columns(rows)
    if fmt == "csv":
        lines = [f"# {key}: {_csv_cell(value, precision)}" for key, value in (header or {}).items()]
        frame = pd.DataFrame([[_csv_cell(row.get(name), precision) for name in columns] for row in rows],
                             columns=columns, dtype=object)
        table = frame.to_csv(index=False, lineterminator="\n") if columns else ""
        return "".join(line + "\n" for line in lines) + table
    if fmt == "json":
        body = [{name: _json_value(row.get(name), precision) for name in columns} for row in rows]
        if header is not None:
            body = {"header": {key: _json_value(value, precision) for key, value in header.items()},
                    "rows": body}
        return json.dumps(body, indent=2, ensure_ascii=False) + "\n"
    raise DomainError(f"unknown output format {fmt!r}")


def write_results(results, path=None, fmt="csv", precision=6):
    """Write results as csv or json to path, or to stdout for None or '-'."""
    text = render_results(results, fmt, precision)
    if path is None or str(path) == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    try:
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)
    except OSError as e:
        logger.error(f"Error writing results to {path}: {e}")
        raise OutputError(f"cannot write {path}: {e.strerror or e}")
    logger.info(f"results written to {path}")
