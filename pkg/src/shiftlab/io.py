"""JSON formats for matrices, potentials, stochastic matrices, cocycles
and points."""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

from .cocycle_relations import CocycleSpec, IntVector, Permutation
from .markov_gibbs import MarkovSpec, Potential
from .sft_core import SequencePoint, TransitionMatrix, format_word, parse_word, validate_matrix


def read_json(source):
    """Parse a path, a JSON string or pass through an already parsed object."""
    if isinstance(source, (dict, list)):
        return source
    text = str(source)
    if text.lstrip()[:1] not in ("{", "["):
        text = Path(text).read_text()
    return json.loads(text)


def parse_number(value, exact: bool = True):
    """``"p/q"``, decimal strings and numbers; exact mode yields Fractions."""
    if isinstance(value, bool):
        raise ValueError("booleans are not numbers")
    if isinstance(value, int):
        return Fraction(value) if exact else float(value)
    if isinstance(value, float):
        return Fraction(repr(value)) if exact else value
    if isinstance(value, Fraction):
        return value if exact else float(value)
    text = str(value).strip()
    try:
        f = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"not a number: {value!r}") from None
    return f if exact else float(f)


def parse_counts(text) -> tuple[int, ...]:
    """``"2,0"`` or a list of ints."""
    if isinstance(text, (list, tuple)):
        return tuple(int(v) for v in text)
    return tuple(int(v) for v in str(text).replace(" ", "").split(",") if v != "")


def load_matrix(source) -> TransitionMatrix:
    doc = read_json(source)
    rows = doc["rows"] if isinstance(doc, dict) else doc
    A = validate_matrix(rows)
    if isinstance(doc, dict) and "n" in doc and int(doc["n"]) != A.n:
        raise ValueError(f"declared n={doc['n']} but {A.n} rows given")
    return A


def dump_matrix(A: TransitionMatrix) -> dict:
    return {"n": A.n, "rows": [list(r) for r in A.entries]}


def _block_key(key: str, n: int | None) -> tuple[int, ...]:
    if "," in key:
        return tuple(int(s) for s in key.split(","))
    return parse_word(key, n)


def load_potential(source, A: TransitionMatrix | None = None) -> Potential:
    """``{"range": r, "table": {"01": value, ...}}``; ``"p/q"`` values stay exact."""
    doc = read_json(source)
    r = int(doc["range"])
    n = A.n if A is not None else None
    table = {}
    for key, val in doc["table"].items():
        table[_block_key(key, n)] = parse_number(val) if isinstance(val, str) else float(val)
    phi = Potential(r, table)
    if A is not None:
        phi.check(A)
    return phi


def load_stochastic(source, A: TransitionMatrix) -> MarkovSpec:
    """``{"rows": [[...]], "initial"?: [...], "kind"?: str}`` or a bare row list.

    Entries may be ints, floats or ``"p/q"`` strings; the MarkovSpec is exact when
    no entry is a float.
    """
    doc = read_json(source)
    if isinstance(doc, list):
        doc = {"rows": doc}
    raw = [v for row in doc["rows"] for v in row] + list(doc.get("initial") or [])
    exact = not any(isinstance(v, float) for v in raw)
    P = [[parse_number(v, exact) for v in row] for row in doc["rows"]]
    init = doc.get("initial")
    if init is not None:
        init = [parse_number(v, exact) for v in init]
    kind = doc.get("kind", "stationary" if init is None else "initial")
    return MarkovSpec.build(A, P, init, kind=kind, exact=exact)


def _group_value(v):
    if isinstance(v, dict) and "perm" in v:
        return Permutation(tuple(v["perm"]))
    if isinstance(v, list):
        return IntVector(tuple(v))
    if isinstance(v, int):
        return IntVector((v,))
    raise ValueError(f"cannot read group element {v!r}")


def load_cocycle(source, n: int | None = None) -> CocycleSpec:
    """``{"kind": ..., "l"?: int, "table"?: {...}, "parts"?: [...], "n"?: int}``."""
    doc = read_json(source)
    n = int(doc.get("n", n)) if doc.get("n", n) is not None else None
    if n is None:
        raise ValueError("alphabet size unknown: give a matrix or an 'n' entry")
    kind = doc["kind"]
    if kind == "symbol_count":
        return CocycleSpec.symbol_count(n)
    if kind == "transition_count":
        return CocycleSpec.transition_count(n, int(doc.get("l", 1)))
    if kind == "transposition":
        return CocycleSpec.transposition(n)
    if kind == "table":
        table = {_block_key(k, n): _group_value(v) for k, v in doc["table"].items()}
        return CocycleSpec.from_table(n, table)
    if kind == "product":
        return CocycleSpec.product(*(load_cocycle(p, n) for p in doc["parts"]))
    raise ValueError(f"unknown cocycle kind {kind!r}")


def load_point(source) -> SequencePoint:
    doc = read_json(source)
    return SequencePoint(
        parse_word(doc.get("prefix", "")),
        parse_word(doc.get("tail_preperiod", "")),
        parse_word(doc.get("tail_period", "0")),
    )


def dump_point(x: SequencePoint, n: int = 10) -> dict:
    return {
        "prefix": format_word(x.prefix, n),
        "tail_preperiod": format_word(x.tail_preperiod, n),
        "tail_period": format_word(x.tail_period, n),
    }
