"""Read/write the toolkit's file formats.

Series CSV columns: series_id,frequency,period,value,lag_months with
frequency in {M,Q,A} and period formats YYYY-MM (M), YYYY-Qn (Q), YYYY (A).
Floats are serialized in shortest round-trip decimal form so written files
are byte-stable.  All files are UTF-8, comma-delimited, '.' decimal.
"""

from __future__ import annotations

import csv
import json
import re
from pathlib import Path
from typing import Sequence

from .errors import (
    EmptyTrace,
    IoError,
    MixedSeriesCodes,
    ParseError,
    UnknownLabel,
    ValidationError,
)
from .feasibility import (
    Availability,
    FeasibilityLabel,
    IndicatorFlag,
    IndicatorRecord,
    Periodicity,
    RuleTrace,
)
from .series import (
    Frequency,
    Observation,
    Period,
    PublicationSchedule,
    TimeSeries,
    validate_series,
)
from .vintage import VintageDate

SERIES_HEADER = ["series_id", "frequency", "period", "value", "lag_months"]
TRACE_HEADER = ["vintage", "growth_nowcast", "level_nowcast"]
CATALOG_HEADER = [
    "indicator_code", "name", "unit", "tier", "periodicity",
    "observation_count", "lag_months", "availability", "flags",
    "explanatory", "feasibility", "notes",
]

_FREQ_CODES = {"M": Frequency.MONTHLY, "Q": Frequency.QUARTERLY, "A": Frequency.ANNUAL}


def parse_period(token: str, frequency: Frequency) -> Period:
    """Period from its textual form; raises ValueError naming the token."""
    if frequency is Frequency.MONTHLY:
        m = re.fullmatch(r"(\d{4})-(\d{2})", token)
        if m is None:
            raise ValueError(f"period {token!r} is not YYYY-MM")
        year, month = int(m.group(1)), int(m.group(2))
        if not 1 <= month <= 12:
            raise ValueError(f"period {token!r} has month outside 01..12")
        return Period(year, month, frequency)
    if frequency is Frequency.QUARTERLY:
        m = re.fullmatch(r"(\d{4})-Q([1-4])", token)
        if m is None:
            raise ValueError(f"period {token!r} is not YYYY-Qn with n in 1..4")
        return Period(int(m.group(1)), int(m.group(2)), frequency)
    m = re.fullmatch(r"(\d{4})", token)
    if m is None:
        raise ValueError(f"period {token!r} is not YYYY")
    return Period(int(m.group(1)), 1, frequency)


def format_period(period: Period) -> str:
    return period.label()


def _open_rows(path) -> list[list[str]]:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            return list(csv.reader(fh))
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc


def read_series_csv(path) -> list[TimeSeries]:
    """One TimeSeries per distinct series_id, each validated."""
    rows = _open_rows(path)
    if not rows or rows[0] != SERIES_HEADER:
        raise ParseError(1, f"header must be {','.join(SERIES_HEADER)}")

    order: list[str] = []
    frequencies: dict[str, Frequency] = {}
    lags: dict[str, int] = {}
    observations: dict[str, list[Observation]] = {}
    for line_no, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(SERIES_HEADER):
            raise ParseError(line_no, f"expected {len(SERIES_HEADER)} fields, got {len(row)}")
        series_id, freq_code, period_token, value_token, lag_token = row
        freq = _FREQ_CODES.get(freq_code)
        if freq is None:
            raise ParseError(line_no, f"frequency {freq_code!r} is not one of M,Q,A")
        try:
            period = parse_period(period_token, freq)
        except ValueError as exc:
            raise ParseError(line_no, str(exc)) from exc
        try:
            value = float(value_token)
        except ValueError as exc:
            raise ParseError(line_no, f"value {value_token!r} is not a number") from exc
        try:
            lag = int(lag_token)
        except ValueError as exc:
            raise ParseError(line_no, f"lag_months {lag_token!r} is not an integer") from exc
        if lag < 0:
            raise ParseError(line_no, f"lag_months {lag} is negative")

        if series_id not in frequencies:
            order.append(series_id)
            frequencies[series_id] = freq
            lags[series_id] = lag
            observations[series_id] = []
        else:
            if frequencies[series_id] is not freq:
                raise ParseError(
                    line_no, f"series {series_id!r} changes frequency mid-file")
            if lags[series_id] != lag:
                raise ParseError(
                    line_no, f"series {series_id!r} changes lag_months mid-file")
        observations[series_id].append(Observation(period, value))

    result = []
    for series_id in order:
        series = TimeSeries(
            id=series_id,
            frequency=frequencies[series_id],
            observations=tuple(observations[series_id]),
            schedule=PublicationSchedule(lags[series_id]),
        )
        violations = validate_series(series)
        if violations:
            raise ValidationError(series_id, violations)
        result.append(series)
    return result


def write_series_csv(series_list: Sequence[TimeSeries], path) -> None:
    lines = [",".join(SERIES_HEADER)]
    for s in series_list:
        freq_code = s.frequency.value
        for o in s.observations:
            lines.append(
                f"{s.id},{freq_code},{format_period(o.period)},"
                f"{float(o.value)!r},{s.schedule.lag_months}"
            )
    _write_text(path, "\n".join(lines) + "\n")


def read_catalog_csv(path) -> list[IndicatorRecord]:
    """Indicator catalog rows; notes preserved verbatim."""
    rows = _open_rows(path)
    if not rows or rows[0] != CATALOG_HEADER:
        raise ParseError(1, f"header must be {','.join(CATALOG_HEADER)}")
    records = []
    for line_no, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(CATALOG_HEADER):
            raise ParseError(line_no, f"expected {len(CATALOG_HEADER)} fields, got {len(row)}")
        (code, name, unit, tier_token, periodicity_token, obs_token,
         lag_token, availability_token, flags_token, expl_token,
         feas_token, notes) = row
        try:
            tier = int(tier_token)
            obs = int(obs_token)
            lag = None if lag_token == "" else int(lag_token)
            periodicity = Periodicity(periodicity_token)
            availability = Availability(availability_token)
            flags = frozenset(
                IndicatorFlag(tok) for tok in flags_token.split(";") if tok
            )
        except ValueError as exc:
            raise ParseError(line_no, str(exc)) from exc
        try:
            explanatory = FeasibilityLabel.parse(expl_token)
            feasibility = FeasibilityLabel.parse(feas_token)
        except UnknownLabel:
            raise
        try:
            records.append(IndicatorRecord(
                indicator_code=code,
                name=name,
                unit=unit,
                tier=tier,
                periodicity=periodicity,
                observation_count=obs,
                lag_months=lag,
                availability=availability,
                flags=flags,
                paper_explanatory=explanatory,
                paper_feasibility=feasibility,
                notes=notes,
            ))
        except ValueError as exc:
            raise ParseError(line_no, str(exc)) from exc
    return records


def write_labeled_catalog_csv(
    records: Sequence[IndicatorRecord],
    derived: Sequence[tuple[FeasibilityLabel, FeasibilityLabel, RuleTrace]],
    path,
) -> None:
    """Catalog rows plus derived_explanatory, derived_feasibility, rules_fired."""
    if len(records) != len(derived):
        raise ValueError("records and derived results differ in length")
    writer_rows = [CATALOG_HEADER + ["derived_explanatory", "derived_feasibility", "rules_fired"]]
    for record, (expl, overall, trace) in zip(records, derived):
        writer_rows.append([
            record.indicator_code,
            record.name,
            record.unit,
            str(record.tier),
            record.periodicity.value,
            str(record.observation_count),
            "" if record.lag_months is None else str(record.lag_months),
            record.availability.value,
            ";".join(sorted(f.value for f in record.flags)),
            record.paper_explanatory.text,
            record.paper_feasibility.text,
            record.notes,
            expl.text,
            overall.text,
            ";".join(trace.fired_ids()),
        ])
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerows(writer_rows)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def read_sdg_api_json(path, lag_months: int, series_id: str | None = None) -> TimeSeries:
    """Annual series from the documented SDG-API observation subset.

    The document is a JSON array of {seriesCode, timePeriod, value} records
    for a single series; every other payload key is ignored.  The caller
    supplies the publication lag.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ParseError(exc.lineno, f"invalid JSON: {exc.msg}") from exc
    if not isinstance(payload, list):
        raise ParseError(1, "document must be a JSON array of observation records")

    codes = set()
    observations = []
    for i, record in enumerate(payload):
        if not isinstance(record, dict):
            raise ParseError(i + 1, "observation record must be an object")
        try:
            code = record["seriesCode"]
            year = int(record["timePeriod"])
            value = float(record["value"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(
                i + 1, f"record needs seriesCode, timePeriod, value: {exc}") from exc
        codes.add(code)
        observations.append(Observation(Period(year, 1, Frequency.ANNUAL), value))
    if len(codes) > 1:
        raise MixedSeriesCodes(f"payload mixes series codes {sorted(codes)}")

    observations.sort(key=lambda o: o.period.sort_key())
    inferred_id = series_id if series_id is not None else (codes.pop() if codes else "")
    series = TimeSeries(
        id=inferred_id,
        frequency=Frequency.ANNUAL,
        observations=tuple(observations),
        schedule=PublicationSchedule(lag_months),
    )
    violations = validate_series(series)
    if violations:
        raise ValidationError(inferred_id, violations)
    return series


def write_trace_csv(trace, path) -> None:
    """CSV with header vintage,growth_nowcast,level_nowcast in vintage order."""
    if not trace.points:
        raise EmptyTrace("trace has no points")
    lines = [",".join(TRACE_HEADER)]
    for point in trace.points:
        lines.append(
            f"{point.vintage},{float(point.growth)!r},{float(point.level)!r}")
    _write_text(path, "\n".join(lines) + "\n")


def read_trace_csv(path) -> list[tuple[VintageDate, float, float]]:
    rows = _open_rows(path)
    if not rows or rows[0] != TRACE_HEADER:
        raise ParseError(1, f"header must be {','.join(TRACE_HEADER)}")
    points = []
    for line_no, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 3:
            raise ParseError(line_no, f"expected 3 fields, got {len(row)}")
        try:
            vintage = VintageDate.parse(row[0])
            growth = float(row[1])
            level = float(row[2])
        except ValueError as exc:
            raise ParseError(line_no, str(exc)) from exc
        points.append((vintage, growth, level))
    return points


def _write_text(path, text: str) -> None:
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
