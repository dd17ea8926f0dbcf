"""
Reading and writing grid panels, role configurations and sweep results.

Panel files are delimited text with a header. Mandatory key columns are
``row``, ``col`` and the period column (``period``, or ``year`` when there
is no ``period`` column, or whatever the role config names). An empty field
or ``NA`` is a missing value. Numbers always use ``.`` as decimal point.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from gridrobust.errors import ConfigurationError, DataError, SchemaError, ValidationError
from gridrobust.grid_model import BINARY_ROLES, GridPanel, Role, VariableSpec
from gridrobust.sweep import SweepResult, SweepRow

MISSING_TOKENS = frozenset({"", "NA"})
RESULT_COLUMNS = ("k", "s", "m", "seed", "n_obs", "coefficient", "se", "z", "p_one_tailed", "converged", "error_code")

_NUMBER = re.compile(r"^[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?$")
_INTEGER = re.compile(r"^[+-]?\d+$")


def _delimiter_for(path, delimiter):
    if delimiter is not None:
        return delimiter
    return "\t" if str(path).lower().endswith((".tsv", ".tab")) else ","


def format_float(x: float) -> str:
    """17 significant digits, so parsing the text gives back the same double."""
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return format(float(x), ".17g")


def parse_float(text: str, column: str = "", line: int | None = None) -> float:
    text = text.strip()
    if text in MISSING_TOKENS:
        return math.nan
    if not _NUMBER.match(text):
        raise DataError(f"column {column!r}: cannot parse {text!r} as a number", line=line)
    return float(text)


def _parse_int(text: str, column: str, line: int) -> int:
    text = text.strip()
    if not _INTEGER.match(text):
        raise DataError(f"column {column!r}: expected an integer, got {text!r}", line=line)
    return int(text)


@dataclass(frozen=True)
class RoleConfig:
    """Variable roles and grid metadata read from a JSON document.

    Required keys: ``base_side_km``, ``variables`` (name -> role string),
    ``outcome`` and ``treatment``. Optional: ``period_column`` and
    ``model_variables`` (defaults to every non-outcome variable).
    """

    base_side_km: float
    variables: tuple[VariableSpec, ...]
    outcome: str
    treatment: str
    period_column: str | None = None
    model_variables: tuple[str, ...] = field(default=())

    @classmethod
    def from_dict(cls, doc: Mapping) -> "RoleConfig":
        if not isinstance(doc, Mapping):
            raise ConfigurationError("role config must be a JSON object")
        for key in ("base_side_km", "variables", "outcome", "treatment"):
            if key not in doc:
                raise ConfigurationError(f"role config is missing {key!r}")
        side = doc["base_side_km"]
        if isinstance(side, bool) or not isinstance(side, (int, float)) or not side > 0:
            raise ConfigurationError(f"base_side_km must be a positive number, got {side!r}")
        roles = doc["variables"]
        if not isinstance(roles, Mapping) or not roles:
            raise ConfigurationError("'variables' must be a non-empty object mapping names to roles")
        variables = tuple(VariableSpec(str(name), Role.parse(role)) for name, role in roles.items())
        by_name = {v.name: v.role for v in variables}
        outcome, treatment = str(doc["outcome"]), str(doc["treatment"])
        for name, role in ((outcome, Role.OUTCOME_BINARY), (treatment, Role.TREATMENT_BINARY)):
            if by_name.get(name) is not role:
                raise ConfigurationError(f"{name!r} must be declared in 'variables' with role {role.value!r}")
            others = [v.name for v in variables if v.role is role and v.name != name]
            if others:
                raise ConfigurationError(f"only one {role.value} variable allowed; also found {others}")
        model = doc.get("model_variables")
        if model is None:
            model = [v.name for v in variables if v.name != outcome]
        unknown = [m for m in model if m not in by_name]
        if unknown:
            raise ConfigurationError(f"model_variables names unknown variables {unknown}")
        return cls(float(side), variables, outcome, treatment, doc.get("period_column"), tuple(model))

    def to_dict(self) -> dict:
        doc = {
            "base_side_km": self.base_side_km,
            "variables": {v.name: v.role.value for v in self.variables},
            "outcome": self.outcome,
            "treatment": self.treatment,
            "model_variables": list(self.model_variables),
        }
        if self.period_column is not None:
            doc["period_column"] = self.period_column
        return doc


def load_config(path) -> RoleConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: invalid JSON ({exc})") from None
    return RoleConfig.from_dict(doc)


def write_config(config: RoleConfig, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(config.to_dict(), fh, indent=2)
        fh.write("\n")


def period_column_for(header: Sequence[str], config: RoleConfig) -> str:
    """The configured period column, else ``period``, else ``year``."""
    if config.period_column:
        return config.period_column
    return "period" if "period" in header or "year" not in header else "year"


def panel_period_column(panel_path, config: RoleConfig, delimiter: str | None = None) -> str:
    with open(panel_path, encoding="utf-8", newline="") as fh:
        header = next(csv.reader(fh, delimiter=_delimiter_for(panel_path, delimiter)), [])
    return period_column_for([h.strip() for h in header], config)


def read_panel(panel_path, config: RoleConfig, delimiter: str | None = None) -> GridPanel:
    """Parse a panel file against an already-loaded role config."""
    sep = _delimiter_for(panel_path, delimiter)
    with open(panel_path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh, delimiter=sep)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise SchemaError(f"{panel_path}: empty file, header row required") from None
        period_col = period_column_for(header, config)
        needed = ["row", "col", period_col] + [v.name for v in config.variables]
        absent = [name for name in needed if name not in header]
        if absent:
            raise SchemaError(f"{panel_path}: missing mandatory column(s) {absent}")
        if len(set(header)) != len(header):
            raise SchemaError(f"{panel_path}: duplicate column names in header")
        pos = {name: header.index(name) for name in needed}

        keys, values, seen = [], [], {}
        for fields in reader:
            line = reader.line_num
            if not fields or all(not f.strip() for f in fields):
                continue
            if len(fields) != len(header):
                raise DataError(f"expected {len(header)} fields, found {len(fields)}", line=line)
            key = (
                _parse_int(fields[pos["row"]], "row", line),
                _parse_int(fields[pos["col"]], "col", line),
                _parse_int(fields[pos[period_col]], period_col, line),
            )
            if key[0] < 0 or key[1] < 0:
                raise DataError(f"row and col must be >= 0, got {key[:2]}", line=line)
            if key in seen:
                raise DataError(f"duplicate key (row, col, {period_col}) = {key}; first seen on line {seen[key]}", line=line)
            seen[key] = line
            record = []
            for var in config.variables:
                x = parse_float(fields[pos[var.name]], var.name, line)
                if var.role in BINARY_ROLES and not (math.isnan(x) or x in (0.0, 1.0)):
                    raise ValidationError(
                        f"binary column {var.name!r} contains {fields[pos[var.name]].strip()!r}; allowed 0, 1, NA",
                        column=var.name, line=line,
                    )
                if math.isinf(x):
                    raise ValidationError(f"column {var.name!r} contains a non-finite value", column=var.name, line=line)
                record.append(x)
            keys.append(key)
            values.append(record)

    keys_arr = np.array(keys, dtype=np.int64).reshape(-1, 3)
    vals_arr = np.array(values, dtype=np.float64).reshape(len(values), len(config.variables))
    return GridPanel(keys_arr[:, 0], keys_arr[:, 1], keys_arr[:, 2], vals_arr, config.variables, config.base_side_km)


def load_panel(panel_path, config_path, delimiter: str | None = None) -> GridPanel:
    """Load and validate a panel file using the JSON role config at ``config_path``."""
    return read_panel(panel_path, load_config(config_path), delimiter)


def write_panel(panel: GridPanel, path, period_column: str = "period", delimiter: str | None = None) -> None:
    """Write ``panel`` in canonical record order; missing values become empty fields."""
    sep = _delimiter_for(path, delimiter)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, delimiter=sep, lineterminator="\n")
        writer.writerow(["row", "col", period_column, *panel.variable_names])
        for r, c, p, vals in zip(panel.rows, panel.cols, panel.periods, panel.values):
            writer.writerow([int(r), int(c), int(p), *(format_float(v) for v in vals)])


def config_for_panel(panel: GridPanel, model_variables: Sequence[str] | None = None) -> RoleConfig:
    """Role config describing ``panel``'s variables."""
    outcome = panel.outcome.name
    model = tuple(model_variables) if model_variables is not None else tuple(
        n for n in panel.variable_names if n != outcome
    )
    return RoleConfig(panel.base_side_km, panel.variables, outcome, panel.treatment.name, None, model)


def write_table(path, header: Sequence[str], rows: Iterable[Sequence], delimiter: str | None = None) -> None:
    sep = _delimiter_for(path, delimiter)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, delimiter=sep, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return format_float(float(v))
    return str(v)


def write_results(result: SweepResult, path, delimiter: str | None = None) -> None:
    """Write one line per sweep row in canonical ``(k, s, m)`` order.

    An ``s_col`` column is appended only when the sweep used independent
    row/column shifts.
    """
    extended = any(row.col_shift is not None for row in result)
    header = RESULT_COLUMNS + (("s_col",) if extended else ())

    def lines():
        for r in result:
            line = [r.k, r.s, r.m, r.seed, r.n_obs, r.coefficient, r.se, r.z, r.p_one_tailed, r.converged, r.error_code]
            if extended:
                line.append(r.col_shift)
            yield line

    try:
        write_table(path, header, lines(), delimiter)
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc.strerror or exc}") from exc


def read_results(path, delimiter: str | None = None) -> SweepResult:
    sep = _delimiter_for(path, delimiter)
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh, delimiter=sep)
        absent = [c for c in RESULT_COLUMNS if c not in (reader.fieldnames or [])]
        if absent:
            raise SchemaError(f"{path}: missing result column(s) {absent}")
        for rec in reader:
            line = reader.line_num
            col_shift = rec.get("s_col") or None
            rows.append(SweepRow(
                k=_parse_int(rec["k"], "k", line),
                s=_parse_int(rec["s"], "s", line),
                m=_parse_int(rec["m"], "m", line),
                seed=_parse_int(rec["seed"], "seed", line),
                n_obs=_parse_int(rec["n_obs"], "n_obs", line),
                coefficient=parse_float(rec["coefficient"], "coefficient", line),
                se=parse_float(rec["se"], "se", line),
                z=parse_float(rec["z"], "z", line),
                p_one_tailed=parse_float(rec["p_one_tailed"], "p_one_tailed", line),
                converged=rec["converged"].strip().lower() == "true",
                error_code=rec["error_code"] or None,
                col_shift=None if col_shift is None else _parse_int(col_shift, "s_col", line),
            ))
    return SweepResult(rows)


def file_sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def ensure_dir(path) -> Path:
    path = Path(path)
    os.makedirs(path, exist_ok=True)
    return path
