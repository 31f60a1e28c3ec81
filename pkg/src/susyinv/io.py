"""File formats: phase-shift tables, pole lists, model JSON and numeric tables.

Every writer goes through :func:`atomic_write` so a crashed run never leaves a
half-written artifact behind.
"""
from __future__ import annotations

import json
import math
import os
import tempfile
from pathlib import Path

import numpy as np

from .erf import ErfModel, PhaseShiftDataset
from .errors import DomainError, ParseError
from .poles import PROVENANCES, PoleSet

DATASET_COLUMNS = ("E_lab_MeV", "delta_deg", "error_deg")


def atomic_write(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _float(tok: str, line: int) -> float:
    try:
        v = float(tok)
    except ValueError:
        raise ParseError(f"not a number: {tok!r}", line) from None
    if not math.isfinite(v):
        raise ParseError(f"non-finite value: {tok!r}", line)
    return v


def parse_dataset(text: str, l: int) -> PhaseShiftDataset:
    """Parse `E_lab_MeV,delta_deg[,error_deg]` with `#` comment lines."""
    comments, rows, header, ncol = [], [], None, 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            comments.append(line[1:].strip())
            continue
        toks = [t.strip() for t in line.split(",")]
        if header is None:
            if tuple(toks) not in (DATASET_COLUMNS[:2], DATASET_COLUMNS):
                raise ParseError(f"expected header {','.join(DATASET_COLUMNS[:2])}[,error_deg], got {line!r}", lineno)
            header, ncol = toks, len(toks)
            continue
        if len(toks) != ncol:
            raise ParseError(f"expected {ncol} columns, got {len(toks)}", lineno)
        rows.append(([_float(t, lineno) for t in toks], lineno))
    if header is None:
        raise ParseError("missing header line", 1)
    if not rows:
        raise ParseError("no data rows", lineno if text else 1)
    for (vals, lineno), prev in zip(rows[1:], rows[:-1]):
        if vals[0] <= prev[0][0]:
            raise ParseError("E_lab must be strictly increasing", lineno)
    for vals, lineno in rows:
        if vals[0] <= 0:
            raise ParseError("E_lab must be positive", lineno)
        if ncol == 3 and vals[2] <= 0:
            raise ParseError("error_deg must be positive", lineno)
    a = np.array([v for v, _ in rows])
    sigma = np.radians(a[:, 2]) if ncol == 3 else None
    try:
        return PhaseShiftDataset(l, a[:, 0], np.radians(a[:, 1]), sigma, tuple(comments))
    except DomainError as e:
        raise ParseError(str(e), rows[0][1]) from None


def read_dataset(path, l: int) -> PhaseShiftDataset:
    return parse_dataset(Path(path).read_text(), l)


def format_dataset(data: PhaseShiftDataset) -> str:
    lines = [f"# {c}" for c in data.comments]
    has_err = data.sigma is not None
    lines.append(",".join(DATASET_COLUMNS if has_err else DATASET_COLUMNS[:2]))
    for i in range(len(data)):
        row = [repr(float(data.e_lab[i])), repr(math.degrees(data.delta[i]))]
        if has_err:
            row.append(repr(math.degrees(data.sigma[i])))
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def write_dataset(path, data: PhaseShiftDataset) -> Path:
    return atomic_write(path, format_dataset(data))


def format_poles(poles: PoleSet) -> str:
    lines = [f"# l = {poles.l}", f"# provenance = {poles.provenance}", "# kappa_fm^-1"]
    lines += [repr(float(x)) for x in poles.kappas]
    return "\n".join(lines) + "\n"


def parse_poles(text: str, l: int | None = None) -> PoleSet:
    """Pole list, one value per line; `# l = ...` and `# provenance = ...` are honoured."""
    meta, vals = {}, []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, sep, val = line[1:].partition("=")
            if sep:
                meta[key.strip()] = val.strip()
            continue
        for tok in line.replace(",", " ").split():
            v = _float(tok, lineno)
            if v == 0:
                raise ParseError("pole at kappa = 0", lineno)
            vals.append(v)
    if not vals:
        raise ParseError("no pole values", 1)
    file_l = int(meta["l"]) if "l" in meta else None
    if l is None:
        l = file_l
    if l is None:
        raise ParseError("partial wave l not given in file or arguments", 1)
    prov = meta.get("provenance", "manual")
    return PoleSet(int(l), tuple(vals), provenance=prov if prov in PROVENANCES else "manual")


def read_poles(path, l: int | None = None) -> PoleSet:
    return parse_poles(Path(path).read_text(), l)


def write_poles(path, poles: PoleSet) -> Path:
    return atomic_write(path, format_poles(poles))


def write_json(path, obj) -> Path:
    return atomic_write(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def write_model(path, model: ErfModel) -> Path:
    return write_json(path, model.to_dict())


def read_model(path) -> ErfModel:
    try:
        return ErfModel.from_dict(json.loads(Path(path).read_text()))
    except (json.JSONDecodeError, KeyError) as e:
        raise ParseError(f"bad model file: {e}", 1) from None


def format_table(columns: dict, header: dict | None = None) -> str:
    """Whitespace-separated numeric table; the first line is `# {json header}`."""
    names = list(columns)
    arrays = [np.asarray(columns[n], dtype=float) for n in names]
    lines = [f"# {json.dumps(header or {}, sort_keys=True)}", "# " + " ".join(names)]
    for row in zip(*arrays):
        lines.append(" ".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def write_table(path, columns: dict, header: dict | None = None) -> Path:
    return atomic_write(path, format_table(columns, header))


def read_table(path):
    """Inverse of :func:`write_table`; returns (header, {name: array})."""
    lines = Path(path).read_text().splitlines()
    header = json.loads(lines[0][1:].strip())
    names = lines[1][1:].split()
    a = np.array([[float(t) for t in ln.split()] for ln in lines[2:] if ln.strip()], ndmin=2)
    return header, {n: a[:, i] for i, n in enumerate(names)}


SAMPLES = {"1S0": ("np_1s0.csv", 0), "1D2": ("np_1d2.csv", 2)}


def load_sample(name: str) -> PhaseShiftDataset:
    """Bundled approximate np sample: '1S0' or '1D2'."""
    from importlib.resources import files

    fname, l = SAMPLES[name]
    return parse_dataset(files("susyinv").joinpath("data", fname).read_text(), l)
