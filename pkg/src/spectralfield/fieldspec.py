"""JSON description of a polynomial matrix field.

Two layouts are accepted::

    {"n": 2, "m": 2, "entries": [[[{"c": 1.0, "e": [1, 0]}], ...], ...]}
    {"n": 2, "potential": [{"c": 0.1667, "e": [3, 0]}, ...]}

Each polynomial is a list of ``{"c": coefficient, "e": exponents}`` terms.
An optional ``"name"`` string is carried through.  The entries grid must be
symmetric term-for-term after normalization.
"""
from __future__ import annotations

import json
from pathlib import Path

from .exceptions import DimensionError, FieldSpecError, NotSymmetricError
from .polyfield import Monomial, PolyMatrixField, Polynomial, field_from_potential


def _parse_poly(terms, n, where):
    if not isinstance(terms, list):
        raise FieldSpecError(f"{where}: polynomial must be a list of terms")
    monos = []
    for idx, term in enumerate(terms):
        if not isinstance(term, dict) or set(term) != {"c", "e"}:
            raise FieldSpecError(f"{where}[{idx}]: term must be an object with keys 'c' and 'e'")
        c, e = term["c"], term["e"]
        if isinstance(c, bool) or not isinstance(c, (int, float)):
            raise FieldSpecError(f"{where}[{idx}]: coefficient must be a number")
        if not isinstance(e, list) or not all(
            isinstance(k, int) and not isinstance(k, bool) and k >= 0 for k in e
        ):
            raise FieldSpecError(f"{where}[{idx}]: exponents must be non-negative integers")
        if len(e) != n:
            raise FieldSpecError(f"{where}[{idx}]: expected {n} exponents, got {len(e)}")
        monos.append(Monomial(float(c), tuple(e)))
    try:
        return Polynomial(n, tuple(monos))
    except ValueError as exc:
        raise FieldSpecError(f"{where}: {exc}") from None


def field_from_spec(spec: dict) -> PolyMatrixField:
    """Build a field from an already-decoded FieldSpec mapping."""
    if not isinstance(spec, dict):
        raise FieldSpecError("field spec must be a JSON object")
    n = spec.get("n")
    if isinstance(n, bool) or not isinstance(n, int) or n < 1:
        raise FieldSpecError("'n' must be a positive integer")
    name = spec.get("name")
    if name is not None and not isinstance(name, str):
        raise FieldSpecError("'name' must be a string")

    has_entries, has_potential = "entries" in spec, "potential" in spec
    if has_entries == has_potential:
        raise FieldSpecError("give exactly one of 'entries' or 'potential'")

    if has_potential:
        u = _parse_poly(spec["potential"], n, "potential")
        if "m" in spec and spec["m"] != n:
            raise FieldSpecError("a potential field has m == n")
        return field_from_potential(u, name)

    m = spec.get("m")
    grid = spec["entries"]
    if isinstance(m, bool) or not isinstance(m, int) or m < 1:
        raise FieldSpecError("'m' must be a positive integer")
    if not isinstance(grid, list) or len(grid) != m or any(
        not isinstance(row, list) or len(row) != m for row in grid
    ):
        raise FieldSpecError(f"'entries' must be an {m}x{m} grid")
    polys = [[_parse_poly(grid[i][k], n, f"entries[{i}][{k}]") for k in range(m)] for i in range(m)]
    try:
        return PolyMatrixField.from_entries(polys, name)
    except NotSymmetricError as exc:
        raise FieldSpecError(f"asymmetric entries grid: {exc}") from None
    except DimensionError as exc:
        raise FieldSpecError(str(exc)) from None


def loads_field(text: str) -> PolyMatrixField:
    try:
        spec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FieldSpecError(f"malformed JSON: {exc.msg}", exc.lineno, exc.colno) from None
    return field_from_spec(spec)


def load_field(path) -> PolyMatrixField:
    return loads_field(Path(path).read_text())


def _poly_to_json(p: Polynomial):
    return [{"c": c, "e": list(e)} for c, e in p.terms]


def field_to_spec(F: PolyMatrixField) -> dict:
    """Entrywise FieldSpec mapping; round-trips through :func:`field_from_spec`."""
    spec = {
        "n": F.n,
        "m": F.m,
        "entries": [[_poly_to_json(p) for p in row] for row in F.entries],
    }
    if F.name is not None:
        spec["name"] = F.name
    return spec
