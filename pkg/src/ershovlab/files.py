"""Line-oriented text formats for tables, sets, and rational sequences.

Three headers: ``ERSHOV-TABLE v1``, ``ERSHOV-SET v1``, ``ERSHOV-SEQ v1``.
Serialization is canonical (sorted rows, lowest-terms rationals), so
parse/serialize is a fixed point on canonical files.
"""

from __future__ import annotations

from fractions import Fraction
from pathlib import Path

import numpy as np

from .density import RationalSequence
from .errors import InputError
from .tables import ApproxTable, SetPrefix

TABLE_MAGIC = "ERSHOV-TABLE v1"
SET_MAGIC = "ERSHOV-SET v1"
SEQ_MAGIC = "ERSHOV-SEQ v1"


def parse_fraction(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"bad rational {text!r}: {exc}") from None


def format_fraction(q: Fraction) -> str:
    return str(q)


def _lines(text: str) -> list[str]:
    return [ln.rstrip("\n") for ln in text.splitlines() if ln.strip()]


def _expect_int(tokens: list[str], what: str, line: str) -> int:
    if len(tokens) != 2:
        raise InputError(f"malformed {what} line: {line!r}")
    try:
        return int(tokens[1])
    except ValueError:
        raise InputError(f"malformed {what} line: {line!r}") from None


def parse_table(text: str) -> ApproxTable:
    lines = _lines(text)
    if not lines or lines[0].strip() != TABLE_MAGIC:
        raise InputError(f"missing {TABLE_MAGIC!r} header")
    if len(lines) < 3:
        raise InputError("table file truncated before universe/stages")
    head_n = lines[1].split()
    head_s = lines[2].split()
    if head_n[:1] != ["universe"] or head_s[:1] != ["stages"]:
        raise InputError("table header must declare universe then stages")
    universe = _expect_int(head_n, "universe", lines[1])
    stages = _expect_int(head_s, "stages", lines[2])
    rows: dict[int, str] = {}
    settled: dict[int, int] = {}
    for line in lines[3:]:
        tokens = line.split()
        if tokens[0] == "row":
            if len(tokens) != 3:
                raise InputError(f"malformed row line: {line!r}")
            try:
                x = int(tokens[1])
            except ValueError:
                raise InputError(f"malformed row line: {line!r}") from None
            bits = tokens[2]
            if x in rows:
                raise InputError(f"duplicate row for element {x}")
            if len(bits) != stages or set(bits) - {"0", "1"}:
                raise InputError(
                    f"row {x} needs a 0/1 string of length {stages}, got {bits!r}"
                )
            rows[x] = bits
        elif tokens[0] == "settled":
            if len(tokens) != 3:
                raise InputError(f"malformed settled line: {line!r}")
            try:
                settled[int(tokens[1])] = int(tokens[2])
            except ValueError:
                raise InputError(f"malformed settled line: {line!r}") from None
        else:
            raise InputError(f"unrecognized table line: {line!r}")
    missing = [x for x in range(universe) if x not in rows]
    if missing:
        raise InputError(f"missing row for element {missing[0]}")
    extra = [x for x in rows if not 0 <= x < universe]
    if extra:
        raise InputError(f"row element {extra[0]} outside universe [0, {universe})")
    entries = np.zeros((universe, stages), dtype=bool)
    for x in range(universe):
        entries[x] = [c == "1" for c in rows[x]]
    return ApproxTable(universe, stages, entries, settled)


def serialize_table(table: ApproxTable) -> str:
    out = [TABLE_MAGIC, f"universe {table.universe}", f"stages {table.stages}"]
    for x in range(table.universe):
        bits = "".join("1" if b else "0" for b in table.entries[x])
        out.append(f"row {x} {bits}")
    for x in sorted(table.settled_by):
        out.append(f"settled {x} {table.settled_by[x]}")
    return "\n".join(out) + "\n"


def parse_set(text: str) -> SetPrefix:
    lines = _lines(text)
    if not lines or lines[0].strip() != SET_MAGIC:
        raise InputError(f"missing {SET_MAGIC!r} header")
    if len(lines) < 3:
        raise InputError("set file truncated")
    universe = _expect_int(lines[1].split(), "universe", lines[1])
    tokens = lines[2].split()
    if tokens[0] == "bits":
        if len(tokens) != 2:
            raise InputError(f"malformed bits line: {lines[2]!r}")
        bits = tokens[1]
        if len(bits) != universe or set(bits) - {"0", "1"}:
            raise InputError(
                f"bits line needs a 0/1 string of length {universe}, got {bits!r}"
            )
        arr = np.array([c == "1" for c in bits], dtype=bool)
        return SetPrefix(universe, arr)
    if tokens[0] == "elems":
        try:
            elems = [int(t) for t in tokens[1:]]
        except ValueError:
            raise InputError(f"malformed elems line: {lines[2]!r}") from None
        if any(a >= b for a, b in zip(elems, elems[1:])):
            raise InputError("elems must be strictly increasing")
        return SetPrefix.from_elements(universe, elems)
    raise InputError(f"set body must start with 'bits' or 'elems', got {lines[2]!r}")


def serialize_set(sp: SetPrefix) -> str:
    bits = "".join("1" if b else "0" for b in sp.bits)
    return f"{SET_MAGIC}\nuniverse {sp.universe}\nbits {bits}\n"


def parse_sequence(text: str) -> RationalSequence:
    lines = _lines(text)
    if not lines or lines[0].strip() != SEQ_MAGIC:
        raise InputError(f"missing {SEQ_MAGIC!r} header")
    body = lines[1:]
    lower = upper = None
    if body and body[0].split()[:1] == ["bounds"]:
        tokens = body[0].split()
        if len(tokens) != 3:
            raise InputError(f"malformed bounds line: {body[0]!r}")
        lower = parse_fraction(tokens[1])
        upper = parse_fraction(tokens[2])
        body = body[1:]
    values = tuple(parse_fraction(ln) for ln in body)
    if not values:
        raise InputError("sequence file has no values")
    return RationalSequence(values, lower=lower, upper=upper)


def serialize_sequence(seq: RationalSequence) -> str:
    out = [SEQ_MAGIC]
    if seq.lower is not None and seq.upper is not None:
        out.append(f"bounds {format_fraction(seq.lower)} {format_fraction(seq.upper)}")
    out.extend(format_fraction(q) for q in seq.values)
    return "\n".join(out) + "\n"


def load_table(path: str | Path) -> ApproxTable:
    return parse_table(Path(path).read_text())


def save_table(table: ApproxTable, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(serialize_table(table))
    return path


def load_set(path: str | Path) -> SetPrefix:
    return parse_set(Path(path).read_text())


def save_set(sp: SetPrefix, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(serialize_set(sp))
    return path


def load_sequence(path: str | Path) -> RationalSequence:
    return parse_sequence(Path(path).read_text())


def save_sequence(seq: RationalSequence, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(serialize_sequence(seq))
    return path
