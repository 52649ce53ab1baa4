"""JSON input documents and report serialization.

A document describes a Lie algebra by its brackets and, optionally, a metric
reductive decomposition::

    {
      "schema": 1,
      "mode": "exact",
      "dim": 3,
      "basis": ["Y", "X1", "X2"],
      "brackets": [[0, 1, ["0", "1", "0"]], [0, 2, ["0", "0", "1"]]],
      "k": [], "h": [0], "n": [1, 2],
      "gram": [["1", "0", "0"], ["0", "1", "0"], ["0", "0", "1"]]
    }

Each bracket triple ``[i, j, coeffs]`` gives ``[e_i, e_j]`` in the basis.
Rationals are strings such as ``"-3/2"``; JSON floats are accepted only in
float mode.  ``k``, ``h``, ``n`` are index lists or lists of row vectors.
Without ``k``/``h``/``n`` the document is a metric Lie algebra and ``gram``
is an inner product on the whole algebra.
"""

from __future__ import annotations

import json
from fractions import Fraction
from numbers import Real

import numpy as np

from .algebra import LieAlgebra, nilradical
from .geometry import InvalidMRD, MetricReductiveDecomposition
from .linalg import DEFAULT_FLOAT_TOL, EXACT, Field, is_positive_definite

SCHEMA_VERSION = 1


class InputError(ValueError):
    """Malformed or invalid document; ``errors`` holds ``(path, message)`` pairs."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(f"{p}: {m}" if p else m for p, m in self.errors))


def _scalar(x, field: Field, path: str):
    if isinstance(x, bool):
        raise InputError([(path, "booleans are not numbers")])
    if isinstance(x, float) and field.exact:
        raise InputError([(path, f"float {x!r} not allowed in exact mode; write rationals as \"p/q\" strings")])
    if isinstance(x, (str, int, float)):
        try:
            return field.scalar(x)
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError([(path, f"not a number: {x!r}")]) from exc
    raise InputError([(path, f"expected a number, got {type(x).__name__}")])


def _field_of(doc: dict) -> Field:
    mode = doc.get("mode", "exact")
    if mode == "exact":
        if "tolerance" in doc:
            raise InputError([("tolerance", "only allowed in float mode")])
        return EXACT
    if mode == "float":
        tol = doc.get("tolerance", DEFAULT_FLOAT_TOL)
        if isinstance(tol, bool) or not isinstance(tol, Real) or not tol > 0:
            raise InputError([("tolerance", "must be a positive number")])
        return Field(float(tol))
    raise InputError([("mode", f"must be 'exact' or 'float', got {mode!r}")])


def _matrix(rows, shape, field: Field, path: str) -> np.ndarray:
    if not isinstance(rows, list) or len(rows) != shape[0]:
        raise InputError([(path, f"expected {shape[0]} rows")])
    out = field.zeros(shape)
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != shape[1]:
            raise InputError([(f"{path}[{i}]", f"expected {shape[1]} entries")])
        for j, x in enumerate(row):
            out[i, j] = _scalar(x, field, f"{path}[{i}][{j}]")
    return out


def _index(x, dim: int, path: str) -> int:
    if isinstance(x, bool) or not isinstance(x, int) or not 0 <= x < dim:
        raise InputError([(path, f"basis index must be an integer in [0, {dim})")])
    return x


def _structure_constants(doc: dict, dim: int, field: Field) -> np.ndarray:
    c = field.zeros((dim, dim, dim))
    seen = {}
    brackets = doc.get("brackets", [])
    if not isinstance(brackets, list):
        raise InputError([("brackets", "must be a list of [i, j, coefficients] triples")])
    for t, entry in enumerate(brackets):
        path = f"brackets[{t}]"
        if not isinstance(entry, list) or len(entry) != 3:
            raise InputError([(path, "must be [i, j, coefficients]")])
        i, j = _index(entry[0], dim, f"{path}[0]"), _index(entry[1], dim, f"{path}[1]")
        coeffs = entry[2]
        if not isinstance(coeffs, list) or len(coeffs) != dim:
            raise InputError([(f"{path}[2]", f"expected {dim} coefficients")])
        vec = [_scalar(x, field, f"{path}[2][{k}]") for k, x in enumerate(coeffs)]
        if i == j:
            if any(not field.is_zero(x) for x in vec):
                raise InputError([(path, f"antisymmetry fails: [e{i}, e{i}] must vanish")])
            continue
        key = (min(i, j), max(i, j))
        sign = 1 if i < j else -1
        vec = [sign * x for x in vec]
        if key in seen:
            prev = seen[key]
            if any(not field.is_zero(a - b) for a, b in zip(prev[1], vec)):
                raise InputError([(path, f"antisymmetry fails: conflicts with brackets[{prev[0]}]")])
            continue
        seen[key] = (t, vec)
        c[key[0], key[1]] = vec
        c[key[1], key[0]] = [-x for x in vec]
    return c


def parse_algebra(doc: dict) -> tuple[LieAlgebra, Field]:
    if not isinstance(doc, dict):
        raise InputError([("", "document must be a JSON object")])
    schema = doc.get("schema", SCHEMA_VERSION)
    if schema != SCHEMA_VERSION:
        raise InputError([("schema", f"unsupported schema version {schema!r}")])
    field = _field_of(doc)
    dim = doc.get("dim")
    if isinstance(dim, bool) or not isinstance(dim, int) or dim < 0:
        raise InputError([("dim", "must be a non-negative integer")])
    names = doc.get("basis")
    if names is not None:
        if not isinstance(names, list) or len(names) != dim or not all(isinstance(s, str) for s in names):
            raise InputError([("basis", f"must be a list of {dim} names")])
        if len(set(names)) != dim:
            raise InputError([("basis", "names must be distinct")])
    c = _structure_constants(doc, dim, field)
    alg = LieAlgebra(c, names, field, check=False)
    defect = alg.jacobi_defect()
    if not field.is_zero(defect):
        bad = _first_jacobi_failure(alg)
        raise InputError([("brackets", f"Jacobi identity fails (defect {defect}) at {bad}")])
    return alg, field


def _first_jacobi_failure(alg: LieAlgebra) -> str:
    n, f = alg.dim, alg.field
    e = f.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                x, y, z = e[i], e[j], e[k]
                cyc = (alg.bracket(alg.bracket(x, y), z) + alg.bracket(alg.bracket(y, z), x)
                       + alg.bracket(alg.bracket(z, x), y))
                if not f.all_zero(cyc):
                    return f"({alg.names[i]}, {alg.names[j]}, {alg.names[k]})"
    return "unknown triple"


def _subspace_spec(doc: dict, key: str, dim: int, field: Field):
    spec = doc.get(key, [])
    if not isinstance(spec, list):
        raise InputError([(key, "must be an index list or a list of row vectors")])
    if all(isinstance(x, int) and not isinstance(x, bool) for x in spec):
        return [_index(x, dim, f"{key}[{t}]") for t, x in enumerate(spec)]
    return _matrix(spec, (len(spec), dim), field, key)


def _format_vector(v, names) -> str:
    terms = [names[i] if x == 1 else f"{fmt_scalar(x)}*{names[i]}" for i, x in enumerate(v) if x != 0]
    return " + ".join(terms) or "0"


def parse_document(doc: dict) -> tuple[LieAlgebra, MetricReductiveDecomposition | None, np.ndarray | None]:
    """Validate a decoded document.

    Returns ``(algebra, mrd, gram)``: ``mrd`` is None for a metric Lie algebra
    document, in which case ``gram`` is its inner product (or None if absent).
    """
    alg, field = parse_algebra(doc)
    dim = alg.dim
    if not any(key in doc for key in ("k", "h", "n")):
        gram = None
        if "gram" in doc:
            gram = _matrix(doc["gram"], (dim, dim), field, "gram")
            _check_gram(gram, field)
        return alg, None, gram
    k, h, n = (_subspace_spec(doc, key, dim, field) for key in ("k", "h", "n"))
    size = sum(len(s) for s in (k, h, n)) - len(k)
    if "gram" not in doc:
        raise InputError([("gram", "required when k, h, n are given")])
    gram = _matrix(doc["gram"], (size, size), field, "gram")
    _check_gram(gram, field)
    try:
        mrd = MetricReductiveDecomposition(alg, k, h, n, gram)
    except InvalidMRD as exc:
        errors = []
        for msg in exc.violations:
            if "nilradical" in msg and "computed" not in msg and field.exact:
                nil = nilradical(alg)
                shown = "; ".join(_format_vector(v, alg.names) for v in nil.basis) or "0"
                msg = f"{msg} (computed nilradical: span{{{shown}}})"
            errors.append((_violation_path(msg), msg))
        raise InputError(errors) from exc
    return alg, mrd, mrd.gram


def _violation_path(msg: str) -> str:
    if "gram" in msg or ("orthogonal" in msg and "Killing" not in msg):
        return "gram"
    if "nilradical" in msg or "[g,n]" in msg:
        return "n"
    if "decomposition" in msg:
        return "k/h/n"
    if "[k," in msg or "ad(" in msg or "Killing" in msg:
        return "k"
    return ""


def _check_gram(gram: np.ndarray, field: Field) -> None:
    if not field.all_zero(gram - gram.T):
        raise InputError([("gram", "gram not symmetric")])
    if not is_positive_definite(gram, field):
        raise InputError([("gram", "gram not positive definite")])


def parse_input(text: str):
    """Parse document text into ``(algebra, mrd)``; ``mrd`` is None without k/h/n."""
    alg, mrd, _ = parse_text(text)
    return alg, mrd


def parse_text(text: str):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError([(f"line {exc.lineno} column {exc.colno}", f"syntax error: {exc.msg}")]) from exc
    return parse_document(doc)


# -- serialization -----------------------------------------------------------------------------------

def fmt_scalar(x) -> str | float:
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return float(x)
    return str(x)


def to_jsonable(obj):
    """Recursively convert Fractions, arrays and tuples to JSON-compatible values."""
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (Fraction, float, np.floating)):
        return fmt_scalar(obj)
    return str(obj)


def serialize_algebra(alg: LieAlgebra) -> dict:
    doc = {"schema": SCHEMA_VERSION, "mode": "exact" if alg.field.exact else "float",
           "dim": alg.dim, "basis": list(alg.names), "brackets": []}
    if not alg.field.exact:
        doc["tolerance"] = alg.field.tol
    for i in range(alg.dim):
        for j in range(i + 1, alg.dim):
            vec = alg.c[i, j]
            if not alg.field.all_zero(vec):
                doc["brackets"].append([i, j, to_jsonable(vec)])
    return doc


def serialize_mrd(mrd: MetricReductiveDecomposition) -> dict:
    """Document for ``mrd`` in its adapted basis ``(k, h, n)``."""
    doc = serialize_algebra(mrd.g)
    doc["k"] = list(range(mrd.nk))
    doc["h"] = list(range(mrd.nk, mrd.nk + mrd.nh))
    doc["n"] = list(range(mrd.nk + mrd.nh, mrd.dim))
    doc["gram"] = to_jsonable(mrd.gram)
    return doc


def dumps(doc) -> str:
    """Deterministic JSON text."""
    return json.dumps(to_jsonable(doc), sort_keys=True, indent=2) + "\n"
