"""CSV ingestion and serialization for lexicons, sample records and label files.

Lexicon schema:
    name,mu_v,mu_a,mu_d,sigma_v,sigma_a,sigma_d,rho_va,rho_vd,rho_ad,universal
Sample schema:
    id,valence,arousal,dominance,label,source
Label schema:
    id,<class name>,...  (one probability column per taxonomy class)

Lines starting with ``#`` are comments (the shipped lexicon uses them for
per-row provenance).  A comment of the form ``# vad-affine: scale=<a>
offset=<b>`` before the header rescales raw source values onto the [-1, 1]
working scale at load time (mu -> a*mu + b, sigma -> |a|*sigma).
"""
from __future__ import annotations

import csv
import re
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .model import (
    EmotionDistribution,
    EmotionModelError,
    PRIMARY_SET,
    ProbLabel,
    SampleRecord,
    Taxonomy,
)

LEXICON_HEADER = [
    "name", "mu_v", "mu_a", "mu_d",
    "sigma_v", "sigma_a", "sigma_d",
    "rho_va", "rho_vd", "rho_ad", "universal",
]
SAMPLE_HEADER = ["id", "valence", "arousal", "dominance", "label", "source"]

_AFFINE_RE = re.compile(
    r"#\s*vad-affine:\s*scale=([-+0-9.eE]+)\s+offset=([-+0-9.eE]+)"
)


class ParseError(EmotionModelError):
    """Malformed file content; the message names the offending line."""


def _float(cell: str, what: str, lineno: int) -> float:
    try:
        return float(cell)
    except ValueError:
        raise ParseError(f"line {lineno}: cannot parse {what} from {cell!r}") from None


def _opt_float(cell: str, what: str, lineno: int) -> Optional[float]:
    cell = cell.strip()
    return None if cell == "" else _float(cell, what, lineno)


def _content_lines(path: Path) -> Tuple[List[Tuple[int, str]], Tuple[float, float]]:
    """Non-comment lines with their 1-based numbers, plus the affine directive."""
    affine = (1.0, 0.0)
    out = []
    with open(path, newline="", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if not line.strip():
                continue
            if line.lstrip().startswith("#"):
                m = _AFFINE_RE.match(line.strip())
                if m:
                    affine = (float(m.group(1)), float(m.group(2)))
                continue
            out.append((lineno, line))
    return out, affine


def load_lexicon(path) -> Taxonomy:
    """Read a lexicon CSV into a Taxonomy, applying any declared affine map."""
    path = Path(path)
    lines, (scale, offset) = _content_lines(path)
    if not lines:
        raise ParseError(f"{path}: empty lexicon")
    header_no, header_line = lines[0]
    header = next(csv.reader([header_line]))
    if [h.strip() for h in header] != LEXICON_HEADER:
        raise ParseError(
            f"line {header_no}: bad lexicon header {header!r}; "
            f"expected {LEXICON_HEADER}"
        )
    if len(lines) == 1:
        raise ParseError(f"{path}: empty lexicon (header only)")

    emotions = []
    for lineno, line in lines[1:]:
        row = next(csv.reader([line]))
        if len(row) != len(LEXICON_HEADER):
            raise ParseError(
                f"line {lineno}: expected {len(LEXICON_HEADER)} fields, got {len(row)}"
            )
        name = row[0].strip()
        if not name:
            raise ParseError(f"line {lineno}: empty emotion name")
        mu = tuple(scale * _float(row[i], LEXICON_HEADER[i], lineno) + offset
                   for i in (1, 2, 3))
        sigma = tuple(abs(scale) * _float(row[i], LEXICON_HEADER[i], lineno)
                      for i in (4, 5, 6))
        rhos = tuple(_opt_float(row[i], LEXICON_HEADER[i], lineno) for i in (7, 8, 9))
        if any(r is None for r in rhos) != all(r is None for r in rhos):
            raise ParseError(
                f"line {lineno}: rho columns must be all present or all empty"
            )
        rho = None if rhos[0] is None else rhos
        universal_cell = row[10].strip()
        if universal_cell not in ("0", "1"):
            raise ParseError(
                f"line {lineno}: universal flag must be 0 or 1, got {universal_cell!r}"
            )
        try:
            emotions.append(EmotionDistribution(
                name=name, mu=mu, sigma=sigma, rho=rho,
                is_universal=universal_cell == "1",
            ))
        except EmotionModelError as exc:
            raise EmotionModelError(f"line {lineno}: {exc}") from None

    names = [e.name for e in emotions]
    dupes = sorted({n for n in names if names.count(n) > 1})
    if dupes:
        raise EmotionModelError(f"{path}: duplicate emotion names {dupes}")
    return Taxonomy(tuple(emotions))


def _fmt(x: float) -> str:
    # repr round-trips floats exactly, keeping load(save(t)) == t
    return repr(float(x))


def save_lexicon(taxonomy: Taxonomy, path) -> None:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(LEXICON_HEADER)
        for e in taxonomy.emotions:
            rho = e.rho if e.rho is not None else ("", "", "")
            w.writerow([
                e.name,
                *(_fmt(x) for x in e.mu),
                *(_fmt(x) for x in e.sigma),
                *(_fmt(r) if r != "" else "" for r in rho),
                "1" if e.is_universal else "0",
            ])


def read_samples(path) -> List[SampleRecord]:
    """Read a sample CSV.  VA range is not enforced here (stages reject)."""
    path = Path(path)
    lines, _ = _content_lines(path)
    if not lines:
        raise ParseError(f"{path}: empty sample file")
    header_no, header_line = lines[0]
    header = [h.strip() for h in next(csv.reader([header_line]))]
    if header != SAMPLE_HEADER:
        raise ParseError(
            f"line {header_no}: bad sample header {header!r}; expected {SAMPLE_HEADER}"
        )
    records = []
    for lineno, line in lines[1:]:
        row = next(csv.reader([line]))
        if len(row) != len(SAMPLE_HEADER):
            raise ParseError(
                f"line {lineno}: expected {len(SAMPLE_HEADER)} fields, got {len(row)}"
            )
        try:
            records.append(SampleRecord(
                id=row[0].strip(),
                valence=_float(row[1], "valence", lineno),
                arousal=_float(row[2], "arousal", lineno),
                dominance=_opt_float(row[3], "dominance", lineno),
                label=row[4].strip() or None,
                source=row[5].strip() or PRIMARY_SET,
            ))
        except ParseError:
            raise
        except EmotionModelError as exc:
            raise EmotionModelError(f"line {lineno}: {exc}") from None
    return records


def write_samples(records: Iterable[SampleRecord], path) -> None:
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(SAMPLE_HEADER)
        for r in records:
            w.writerow([
                r.id,
                _fmt(r.valence),
                _fmt(r.arousal),
                _fmt(r.dominance) if r.dominance is not None else "",
                r.label or "",
                r.source,
            ])


def write_labels(rows: Iterable[Tuple[str, ProbLabel]], class_names: Sequence[str],
                 path) -> None:
    """Write a label CSV with 9 significant digits per probability."""
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["id", *class_names])
        for sample_id, label in rows:
            if label.K != len(class_names):
                raise EmotionModelError(
                    f"{sample_id}: label has {label.K} classes, header has "
                    f"{len(class_names)}"
                )
            w.writerow([sample_id, *(f"{p:.9g}" for p in label.probs)])


def read_labels(path) -> Tuple[List[str], List[Tuple[str, np.ndarray]]]:
    """Read a label CSV; returns (class names, [(id, prob vector), ...])."""
    path = Path(path)
    lines, _ = _content_lines(path)
    if not lines:
        raise ParseError(f"{path}: empty label file")
    header_no, header_line = lines[0]
    header = [h.strip() for h in next(csv.reader([header_line]))]
    if len(header) < 2 or header[0] != "id":
        raise ParseError(f"line {header_no}: bad label header {header!r}")
    class_names = header[1:]
    rows = []
    for lineno, line in lines[1:]:
        row = next(csv.reader([line]))
        if len(row) != len(header):
            raise ParseError(
                f"line {lineno}: expected {len(header)} fields, got {len(row)}"
            )
        vec = np.array([_float(c, "probability", lineno) for c in row[1:]])
        rows.append((row[0].strip(), vec))
    return class_names, rows


def read_categorical_labels(path) -> Dict[str, str]:
    """Read an ``id,label`` CSV used as categorical ground truth."""
    path = Path(path)
    lines, _ = _content_lines(path)
    if not lines:
        raise ParseError(f"{path}: empty file")
    header_no, header_line = lines[0]
    header = [h.strip() for h in next(csv.reader([header_line]))]
    if header != ["id", "label"]:
        raise ParseError(
            f"line {header_no}: bad header {header!r}; expected ['id', 'label']"
        )
    out: Dict[str, str] = {}
    for lineno, line in lines[1:]:
        row = next(csv.reader([line]))
        if len(row) != 2:
            raise ParseError(f"line {lineno}: expected 2 fields, got {len(row)}")
        out[row[0].strip()] = row[1].strip()
    return out
