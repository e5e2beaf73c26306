"""Operator-spec files and analysis reports.

Spec files are JSON.  Matrices are lists of rows; an entry is a number or a
``[re, im]`` pair.  ``J`` is a matrix, ``{"signature": [...]}`` or
``{"flip_blocks": k}``.  Exactly one payload key is allowed:

* ``"T"``: a matrix;
* ``"factors"``: ``{"A": matrix, "B": matrix}``;
* ``"family"``: ``{"kind", "params", "seed", "N"}``.

An optional ``"expect"`` object carries oracle values that commands compare
against; a mismatch is reported as a violation.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from numbers import Number
from pathlib import Path
from typing import Any

import numpy as np

from .errors import DimensionMismatch, InputError, ParseError, ValidationError
from .family import (
    BlockFamily,
    Rule,
    example_one_family,
    explicit_family,
    graded_neutrality_family,
    product_of_blocks_family,
    truncate,
)
from .krein import FundamentalSymmetry, KreinOperator
from .products import FactorPair

__all__ = [
    "OperatorSpec",
    "load_spec",
    "parse_spec",
    "dump_spec",
    "spec_digest",
    "parse_matrix",
    "encode_matrix",
    "to_jsonable",
    "render_json",
    "write_atomic",
    "error_object",
]

PAYLOADS = ("T", "factors", "family")
DEFAULT_FAMILY_N = 8


def parse_matrix(value, key: str) -> np.ndarray:
    if not isinstance(value, list) or not value:
        raise ValidationError(key, "expected a non-empty list of rows")
    rows = []
    for i, row in enumerate(value):
        if not isinstance(row, list) or not row:
            raise ValidationError(key, f"row {i} is not a non-empty list")
        out = []
        for j, x in enumerate(row):
            if isinstance(x, bool):
                raise ValidationError(key, f"entry ({i}, {j}) is a boolean")
            if isinstance(x, Number):
                out.append(complex(float(x), 0.0))
            elif isinstance(x, list) and len(x) == 2 and all(
                isinstance(t, Number) and not isinstance(t, bool) for t in x
            ):
                out.append(complex(float(x[0]), float(x[1])))
            else:
                raise ValidationError(key, f"entry ({i}, {j}) must be a number or [re, im]")
        rows.append(out)
    if len({len(r) for r in rows}) != 1:
        raise ValidationError(key, "rows have unequal lengths")
    M = np.array(rows, dtype=complex)
    if not np.all(np.isfinite(M)):
        raise ValidationError(key, "entries must be finite")
    return M


def encode_matrix(M) -> list:
    M = np.asarray(M, dtype=complex)
    return [[[float(z.real) + 0.0, float(z.imag) + 0.0] for z in row] for row in M]


def _parse_J(value, key: str = "J") -> FundamentalSymmetry:
    try:
        if isinstance(value, dict):
            if set(value) == {"signature"}:
                sig = value["signature"]
                if not isinstance(sig, list) or any(s not in (1, -1) or isinstance(s, bool) for s in sig):
                    raise ValidationError(key, "signature must be a list of +1/-1")
                return FundamentalSymmetry.from_signature(sig)
            if set(value) == {"flip_blocks"}:
                k = value["flip_blocks"]
                if isinstance(k, bool) or not isinstance(k, int):
                    raise ValidationError(key, "flip_blocks must be a positive integer")
                return FundamentalSymmetry.flip_blocks(k)
            raise ValidationError(key, "expected a matrix, {'signature': ...} or {'flip_blocks': k}")
        return FundamentalSymmetry(parse_matrix(value, key))
    except ValidationError:
        raise
    except InputError as exc:
        raise ValidationError(key, str(exc)) from exc


def _parse_rule(value, key: str) -> Rule:
    if not isinstance(value, dict):
        raise ValidationError(key, "rule must be an object with a 'type'")
    try:
        return Rule.from_dict(value)
    except InputError as exc:
        raise ValidationError(key, str(exc)) from exc


def _number(params: dict, name: str, default: float, key: str) -> float:
    v = params.get(name, default)
    if isinstance(v, bool) or not isinstance(v, Number) or not math.isfinite(v):
        raise ValidationError(f"{key}.{name}", "must be a finite number")
    return float(v)


def _parse_family(value) -> tuple[BlockFamily, int, dict]:
    key = "family"
    if not isinstance(value, dict):
        raise ValidationError(key, "must be an object")
    unknown = set(value) - {"kind", "params", "seed", "N"}
    if unknown:
        raise ValidationError(key, f"unknown keys {sorted(unknown)}")
    kind = value.get("kind")
    params = value.get("params", {})
    seed = value.get("seed", 0)
    N = value.get("N", DEFAULT_FAMILY_N)
    if not isinstance(params, dict):
        raise ValidationError("family.params", "must be an object")
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ValidationError("family.seed", "must be a non-negative integer")
    if isinstance(N, bool) or not isinstance(N, int) or N < 1:
        raise ValidationError("family.N", "must be a positive integer")
    pk = "family.params"
    try:
        if kind == "ExampleOne":
            rule = _parse_rule(params.get("scale", {"type": "power", "exponent": 1.0}), f"{pk}.scale")
            fam = example_one_family(seed, rule, _number(params, "mixing", 0.5, pk))
            norm_params = {"scale": rule.to_dict(), "mixing": fam.params["mixing"]}
        elif kind == "GradedNeutrality":
            kappa = _parse_rule(params.get("kappa", {"type": "constant", "value": 1.0}), f"{pk}.kappa")
            eig = _parse_rule(params.get("eigenvalues", {"type": "power", "exponent": 2.0}), f"{pk}.eigenvalues")
            fam = graded_neutrality_family(seed, kappa, eig)
            norm_params = {"kappa": kappa.to_dict(), "eigenvalues": eig.to_dict()}
        elif kind == "ProductOfBlocks":
            fam = product_of_blocks_family(
                seed,
                _number(params, "x0", 1.0, pk),
                _number(params, "mixing", 0.5, pk),
                _number(params, "other_scale", 0.25, pk),
            )
            norm_params = dict(fam.params)
        elif kind == "ExplicitList":
            blocks = params.get("blocks")
            if not isinstance(blocks, list) or not blocks:
                raise ValidationError(f"{pk}.blocks", "must be a non-empty list of {'T', 'J'} objects")
            parsed = []
            for i, b in enumerate(blocks):
                bk = f"{pk}.blocks[{i}]"
                if not isinstance(b, dict) or set(b) != {"T", "J"}:
                    raise ValidationError(bk, "each block needs exactly 'T' and 'J'")
                T = parse_matrix(b["T"], f"{bk}.T")
                J = _parse_J(b["J"], f"{bk}.J")
                if T.shape != (J.dim, J.dim):
                    raise DimensionMismatch(f"{bk}: T is {T.shape}, J has dimension {J.dim}")
                parsed.append((T, J.matrix))
            fam = explicit_family(parsed)
            norm_params = {"blocks": [{"T": encode_matrix(T), "J": encode_matrix(J)} for T, J in parsed]}
        else:
            raise ValidationError("family.kind", f"unknown family kind {kind!r}")
    except (ValidationError, DimensionMismatch):
        raise
    except InputError as exc:
        raise ValidationError(pk, str(exc)) from exc
    if fam.length is not None and N > fam.length:
        raise ValidationError("family.N", f"family has only {fam.length} blocks")
    normalized = {"kind": kind, "params": norm_params, "seed": seed, "N": N}
    return fam, N, normalized


@dataclass(frozen=True, eq=False)
class OperatorSpec:
    payload: str
    J: FundamentalSymmetry | None
    T: np.ndarray | None = None
    factors: FactorPair | None = None
    family: BlockFamily | None = None
    N: int | None = None
    expect: dict = field(default_factory=dict)
    normalized: dict = field(default_factory=dict)

    @property
    def digest(self) -> str:
        return spec_digest(self.normalized)

    def operator(self) -> KreinOperator:
        """The Krein operator (T, J): the payload itself or the family section."""
        if self.payload == "T":
            return KreinOperator(self.T, self.J)
        if self.payload == "family":
            return truncate(self.family, self.N)
        raise InputError("this command needs a 'T' or 'family' payload")

    def factor_pair(self) -> FactorPair:
        """Explicit factors, or (T, T^[*]) for an operator payload."""
        if self.payload == "factors":
            return self.factors
        return FactorPair.from_krein(self.operator())


def spec_digest(normalized: dict) -> str:
    text = json.dumps(normalized, sort_keys=True, separators=(",", ":"), allow_nan=False)
    return hashlib.sha256(text.encode()).hexdigest()


def parse_spec(doc: Any) -> OperatorSpec:
    if not isinstance(doc, dict):
        raise ValidationError("<root>", "spec must be a JSON object")
    unknown = set(doc) - {"J", *PAYLOADS, "expect"}
    if unknown:
        raise ValidationError(sorted(unknown)[0], "unknown top-level key")
    present = [k for k in PAYLOADS if k in doc]
    if len(present) != 1:
        raise ValidationError("T" if not present else present[1],
                              "exactly one of 'T', 'factors', 'family' is required")
    payload = present[0]
    normalized: dict = {}
    J = None
    if "J" in doc:
        J = _parse_J(doc["J"])
        normalized["J"] = encode_matrix(J.matrix)
    elif payload == "T":
        raise ValidationError("J", "missing fundamental symmetry")

    T = factors = family = N = None
    if payload == "T":
        T = parse_matrix(doc["T"], "T")
        if T.shape[0] != T.shape[1]:
            raise ValidationError("T", f"must be square, got {T.shape}")
        if T.shape[0] != J.dim:
            raise DimensionMismatch(f"T is {T.shape[0]}x{T.shape[1]} but J has dimension {J.dim}")
        normalized["T"] = encode_matrix(T)
    elif payload == "factors":
        f = doc["factors"]
        if not isinstance(f, dict) or set(f) != {"A", "B"}:
            raise ValidationError("factors", "must be an object with exactly 'A' and 'B'")
        A = parse_matrix(f["A"], "factors.A")
        B = parse_matrix(f["B"], "factors.B")
        factors = FactorPair(A, B)
        normalized["factors"] = {"A": encode_matrix(A), "B": encode_matrix(B)}
    else:
        family, N, normalized["family"] = _parse_family(doc["family"])
        if J is not None:
            op = truncate(family, N)
            if op.J != J:
                raise ValidationError("J", "does not match the family's fundamental symmetry")

    expect = doc.get("expect", {})
    if not isinstance(expect, dict):
        raise ValidationError("expect", "must be an object")
    expect_parsed = {}
    for k, v in expect.items():
        if isinstance(v, list):
            expect_parsed[k] = parse_matrix(v, f"expect.{k}")
            normalized.setdefault("expect", {})[k] = encode_matrix(expect_parsed[k])
        elif isinstance(v, (bool, int, float, str)):
            expect_parsed[k] = v
            normalized.setdefault("expect", {})[k] = v
        else:
            raise ValidationError(f"expect.{k}", "must be a matrix, number, boolean or string")
    return OperatorSpec(payload, J, T, factors, family, N, expect_parsed, normalized)


def load_spec(path) -> OperatorSpec:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc
    return parse_spec(doc)


def dump_spec(spec: OperatorSpec) -> str:
    """Normalized JSON text; ``parse_spec(json.loads(dump_spec(s)))`` has the same digest."""
    return json.dumps(spec.normalized, sort_keys=True, indent=2, allow_nan=False) + "\n"


# --------------------------------------------------------------------------
# reports
# --------------------------------------------------------------------------


def to_jsonable(x):
    if isinstance(x, dict):
        return {str(k): to_jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        if np.iscomplexobj(x):
            return encode_matrix(x) if x.ndim == 2 else [to_jsonable(complex(v)) for v in x]
        return to_jsonable(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [to_jsonable(float(x.real)), to_jsonable(float(x.imag))]
    if isinstance(x, (float, np.floating)):
        x = float(x)
        if math.isfinite(x):
            return x + 0.0
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    if x is None or isinstance(x, str):
        return x
    if hasattr(x, "value") and hasattr(x, "name"):
        return x.value
    raise TypeError(f"cannot serialize {type(x).__name__}")


def render_json(obj) -> str:
    return json.dumps(to_jsonable(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_atomic(path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def error_object(exc: BaseException) -> dict:
    out = {"error": type(exc).__name__, "message": str(exc)}
    if isinstance(exc, ValidationError):
        out["key"] = exc.key
    return out
