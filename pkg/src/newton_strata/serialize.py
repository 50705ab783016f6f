"""JSON matrix files and exact-rational rendering.

Matrix file::

    {"q": 2, "e": 1, "n": 2, "prec": [0, null],
     "entries": [[[], [[1, [1]]]],
                 [[[0, [1]]], []]]}

``q`` is the size of the base field F_q that sigma fixes, ``e`` the degree of
the coefficient field over F_p (a multiple of log_p q).  ``entries[i][j]`` is a
list of ``[exponent, coordinates]`` terms; coordinates are little-endian in
the polynomial basis of the fixed modulus.  ``prec`` is ``[lowest exponent,
precision]`` with ``null`` for exact entries.  An entry whose own precision
differs from the matrix-level one is written ``{"prec": P, "terms": [...]}``.
"""

from __future__ import annotations

import json
from fractions import Fraction

from .errors import ParseError
from .fields import finite_field, prime_power
from .matrix import SeriesMatrix
from .series import TruncatedSeries

_WS = " \t\n\r"


def _skip(text, i):
    while i < len(text) and text[i] in _WS:
        i += 1
    return i


def _position(text, path):
    """(line, column) of the JSON value reached by following ``path`` (keys / indices)."""
    dec = json.JSONDecoder()
    i = _skip(text, 0)
    try:
        for step in path:
            i = _skip(text, i)
            if text[i] == "{":
                i = _skip(text, i + 1)
                while text[i] != "}":
                    key, i = dec.raw_decode(text, i)
                    i = _skip(text, i)
                    i = _skip(text, i + 1)  # ':'
                    if key == step:
                        break
                    _, i = dec.raw_decode(text, i)
                    i = _skip(text, i)
                    if text[i] == ",":
                        i = _skip(text, i + 1)
                else:
                    break
            elif text[i] == "[":
                i = _skip(text, i + 1)
                for _ in range(int(step)):
                    _, i = dec.raw_decode(text, i)
                    i = _skip(text, i)
                    if text[i] == ",":
                        i = _skip(text, i + 1)
            else:
                break
    except (IndexError, ValueError, TypeError):
        pass
    i = min(i, len(text))
    line = text.count("\n", 0, i) + 1
    col = i - (text.rfind("\n", 0, i) + 1) + 1
    return line, col


def _fail(text, path, message):
    line, col = _position(text, path)
    raise ParseError(message, line, col)


def _is_int(x):
    return isinstance(x, int) and not isinstance(x, bool)


def parse_matrix_file(text: str) -> SeriesMatrix:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    if not isinstance(doc, dict):
        _fail(text, [], "matrix document must be a JSON object")
    for key in ("q", "e", "n", "entries"):
        if key not in doc:
            _fail(text, [], f"missing field {key!r}")
    q, e, n = doc["q"], doc["e"], doc["n"]
    if not _is_int(q):
        _fail(text, ["q"], "q must be an integer")
    try:
        p, f = prime_power(q)
    except Exception:
        _fail(text, ["q"], f"q={q} is not a prime power")
    if not _is_int(e) or e < 1 or e % f:
        _fail(text, ["e"], f"e must be a positive multiple of {f}")
    if not _is_int(n) or n < 1:
        _fail(text, ["n"], "n must be a positive integer")
    prec = doc.get("prec", [None, None])
    if not (isinstance(prec, list) and len(prec) == 2 and (prec[1] is None or _is_int(prec[1]))
            and (prec[0] is None or _is_int(prec[0]))):
        _fail(text, ["prec"], "prec must be [lowest exponent, precision or null]")
    lo, hi = prec
    field = finite_field(p, e, f)
    rows = doc["entries"]
    if not isinstance(rows, list) or len(rows) != n:
        _fail(text, ["entries"], f"entries must be a list of {n} rows")
    out = []
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != n:
            _fail(text, ["entries", i], f"row {i} must have {n} entries")
        out_row = []
        for j, entry in enumerate(row):
            path = ["entries", i, j]
            eprec = hi
            terms = entry
            if isinstance(entry, dict):
                if "terms" not in entry:
                    _fail(text, path, "entry object needs 'terms'")
                eprec = entry.get("prec", hi)
                if eprec is not None and not _is_int(eprec):
                    _fail(text, path + ["prec"], "entry precision must be an integer or null")
                terms = entry["terms"]
                path = path + ["terms"]
            if not isinstance(terms, list):
                _fail(text, path, "entry must be a list of [exponent, coordinates] terms")
            parsed = {}
            for k, term in enumerate(terms):
                tp = path + [k]
                if not (isinstance(term, list) and len(term) == 2):
                    _fail(text, tp, "term must be [exponent, coordinates]")
                exp, coords = term
                if not _is_int(exp):
                    _fail(text, tp + [0], f"exponent must be an integer, got {exp!r}")
                if lo is not None and exp < lo:
                    _fail(text, tp + [0], f"exponent {exp} below declared lowest exponent {lo}")
                if eprec is not None and exp >= eprec:
                    _fail(text, tp + [0], f"exponent {exp} not below precision {eprec}")
                if exp in parsed:
                    _fail(text, tp + [0], f"duplicate exponent {exp}")
                if not (isinstance(coords, list) and len(coords) == e
                        and all(_is_int(c) and 0 <= c < p for c in coords)):
                    _fail(text, tp + [1], f"coordinates must be {e} integers in [0, {p})")
                parsed[exp] = tuple(coords)
            out_row.append(TruncatedSeries.from_terms(field, parsed, eprec))
        out.append(out_row)
    return SeriesMatrix(out)


def matrix_to_doc(b: SeriesMatrix) -> dict:
    F = b.field
    hi = b.prec
    lo = min((x.min_exp for r in b.entries for x in r if not x.is_zero()), default=0)
    rows = []
    for r in b.entries:
        row = []
        for x in r:
            terms = [[k, list(c)] for k, c in sorted(x.terms().items())]
            row.append(terms if x.prec == hi else {"prec": x.prec, "terms": terms})
        rows.append(row)
    return {"q": F.base_q, "e": F.e, "n": b.n, "prec": [lo, hi], "entries": rows}


def serialize_matrix(b: SeriesMatrix) -> str:
    doc = matrix_to_doc(b)
    lines = ["{", f'  "q": {doc["q"]}, "e": {doc["e"]}, "n": {doc["n"]}, '
             f'"prec": {json.dumps(doc["prec"])},', '  "entries": [']
    for i, row in enumerate(doc["entries"]):
        sep = "," if i < len(doc["entries"]) - 1 else ""
        lines.append("    " + json.dumps(row, separators=(",", ":")) + sep)
    lines.append("  ]")
    lines.append("}")
    return "\n".join(lines) + "\n"


def rational(x) -> str:
    """Exact rational as ``"p/q"`` (or ``"p"`` when integral)."""
    return str(Fraction(x))


def vector(v) -> list:
    return [rational(x) for x in v]
