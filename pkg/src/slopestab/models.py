"""Intersection-table data model and model-file ingestion.

A model document is JSON with a top-level "kind" of "table", "mixed-table"
or "toric".  All rationals travel as integers or decimal-free "p/q" strings
so exactness survives any document toolchain; unknown fields are rejected.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Union

_RATIONAL_RE = re.compile(r"(-?\d+)(?:/(-?\d+))?")


class ModelError(ValueError):
    """Malformed or invariant-violating model document."""


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "warn" | "error"
    message: str


@dataclass(frozen=True)
class Diagnostics:
    entries: tuple[Diagnostic, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.errors

    @property
    def errors(self) -> tuple[Diagnostic, ...]:
        return tuple(d for d in self.entries if d.severity == "error")

    @property
    def warnings(self) -> tuple[Diagnostic, ...]:
        return tuple(d for d in self.entries if d.severity == "warn")

    def __iter__(self):
        return iter(self.entries)


def parse_rational(value) -> Fraction:
    """Parse an exact rational from an int or a "p/q" string."""
    if isinstance(value, bool):
        raise ModelError(f"expected rational, got boolean {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        m = _RATIONAL_RE.fullmatch(value.strip())
        if not m:
            raise ModelError(f"malformed rational literal {value!r}")
        num = int(m.group(1))
        den = int(m.group(2)) if m.group(2) is not None else 1
        if den <= 0:
            raise ModelError(f"non-positive denominator in {value!r}")
        return Fraction(num, den)
    raise ModelError(
        f"rationals must be integers or 'p/q' strings, got {type(value).__name__}"
    )


def format_rational(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class IntersectionTable:
    """The finitely many intersection numbers that determine the slope invariants.

    ae[k] houses ((pi*L)^(n-k) . E^k) for k = 0..n and kae[k] houses
    (K_X' . (pi*L)^(n-1-k) . E^k) for k = 0..n-1, together with the nef
    threshold epsilon.
    """

    label: str
    n: int
    ae: tuple[Fraction, ...]
    kae: tuple[Fraction, ...]
    epsilon: Fraction

    def __post_init__(self):
        if self.n < 1:
            raise ModelError(f"dimension must be positive, got {self.n}")
        if len(self.ae) != self.n + 1:
            raise ModelError(f"AE must have {self.n + 1} entries, got {len(self.ae)}")
        if len(self.kae) != self.n:
            raise ModelError(f"KAE must have {self.n} entries, got {len(self.kae)}")

    def alpha0_value(self, t) -> Fraction:
        """((pi*L - tE)^n) / n! by binomial expansion of the stored entries."""
        t = Fraction(t)
        total = sum(
            comb(self.n, k) * (-t) ** k * self.ae[k] for k in range(self.n + 1)
        )
        fact = 1
        for i in range(2, self.n + 1):
            fact *= i
        return Fraction(total, fact)


@dataclass(frozen=True)
class MixedTable:
    """Two-polarization table for L + sH perturbations.

    mixed[(i, j, k)] houses ((pi*L)^i . (pi*H)^j . E^k) over i+j+k = n and
    kmixed the analogous K_X' pairings over i+j+k = n-1.  The j = 0 slice
    must agree with the declared base table entries.
    """

    label: str
    n: int
    ae: tuple[Fraction, ...]
    kae: tuple[Fraction, ...]
    mixed: dict[tuple[int, int, int], Fraction] = field(compare=False)
    kmixed: dict[tuple[int, int, int], Fraction] = field(compare=False)
    epsilon: Fraction = Fraction(1)

    def __post_init__(self):
        if self.n < 1:
            raise ModelError(f"dimension must be positive, got {self.n}")
        for deg, entries, name in (
            (self.n, self.mixed, "MIX"),
            (self.n - 1, self.kmixed, "KMIX"),
        ):
            expected = {
                (i, j, deg - i - j)
                for i in range(deg + 1)
                for j in range(deg + 1 - i)
            }
            if set(entries) != expected:
                raise ModelError(f"{name} must cover exactly the degree-{deg} index simplex")

    def base_table(self) -> IntersectionTable:
        return IntersectionTable(self.label, self.n, self.ae, self.kae, self.epsilon)

    def specialize(self, s) -> IntersectionTable:
        """Single-polarization table of L + sH, exact in s."""
        s = Fraction(s)
        ae = tuple(
            sum(
                comb(self.n - k, j) * s**j * self.mixed[(self.n - k - j, j, k)]
                for j in range(self.n - k + 1)
            )
            for k in range(self.n + 1)
        )
        kae = tuple(
            sum(
                comb(self.n - 1 - k, j) * s**j * self.kmixed[(self.n - 1 - k - j, j, k)]
                for j in range(self.n - k)
            )
            for k in range(self.n)
        )
        label = self.label if s == 0 else f"{self.label} [s={format_rational(s)}]"
        return IntersectionTable(label, self.n, ae, kae, self.epsilon)


Model = Union[IntersectionTable, MixedTable, "object"]


def _require_keys(doc: dict, required: set[str], optional: set[str] = frozenset()):
    keys = set(doc)
    missing = required - keys
    if missing:
        raise ModelError(f"missing required field(s): {', '.join(sorted(missing))}")
    unknown = keys - required - optional
    if unknown:
        raise ModelError(f"unknown field(s): {', '.join(sorted(unknown))}")


def _parse_int(doc, key) -> int:
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ModelError(f"field {key!r} must be an integer")
    return v


def _parse_rational_list(doc, key) -> tuple[Fraction, ...]:
    v = doc[key]
    if not isinstance(v, list):
        raise ModelError(f"field {key!r} must be a list")
    return tuple(parse_rational(x) for x in v)


def _parse_index_map(doc, key, degree) -> dict[tuple[int, int, int], Fraction]:
    v = doc[key]
    if not isinstance(v, dict):
        raise ModelError(f"field {key!r} must be an object")
    out = {}
    for raw, val in v.items():
        parts = raw.split(",")
        if len(parts) != 3:
            raise ModelError(f"{key} key {raw!r} is not of the form 'i,j,k'")
        try:
            idx = tuple(int(p) for p in parts)
        except ValueError as exc:
            raise ModelError(f"{key} key {raw!r} is not integral") from exc
        if min(idx) < 0 or sum(idx) != degree:
            raise ModelError(f"{key} key {raw!r} outside the degree-{degree} simplex")
        out[idx] = parse_rational(val)
    return out


def _parse_epsilon(doc) -> Fraction:
    eps = parse_rational(doc["epsilon"])
    if eps <= 0:
        raise ModelError(f"epsilon must be positive, got {format_rational(eps)}")
    return eps


def parse_model(data):
    """Parse a model document (bytes, str or already-decoded dict).

    Returns an IntersectionTable, MixedTable or ToricModel according to the
    document's "kind"; every rational is parsed exactly.
    """
    if isinstance(data, (bytes, bytearray)):
        data = data.decode("utf-8")
    if isinstance(data, str):
        try:
            doc = json.loads(data)
        except json.JSONDecodeError as exc:
            raise ModelError(f"malformed JSON: {exc}") from exc
    else:
        doc = data
    if not isinstance(doc, dict):
        raise ModelError("model document must be a JSON object")
    kind = doc.get("kind")
    if kind == "table":
        _require_keys(doc, {"kind", "label", "n", "AE", "KAE", "epsilon"})
        return IntersectionTable(
            label=str(doc["label"]),
            n=_parse_int(doc, "n"),
            ae=_parse_rational_list(doc, "AE"),
            kae=_parse_rational_list(doc, "KAE"),
            epsilon=_parse_epsilon(doc),
        )
    if kind == "mixed-table":
        _require_keys(doc, {"kind", "label", "n", "AE", "KAE", "MIX", "KMIX", "epsilon"})
        n = _parse_int(doc, "n")
        return MixedTable(
            label=str(doc["label"]),
            n=n,
            ae=_parse_rational_list(doc, "AE"),
            kae=_parse_rational_list(doc, "KAE"),
            mixed=_parse_index_map(doc, "MIX", n),
            kmixed=_parse_index_map(doc, "KMIX", n - 1),
            epsilon=_parse_epsilon(doc),
        )
    if kind == "toric":
        from .toric import parse_toric_model

        return parse_toric_model(doc)
    raise ModelError(f"unknown model kind {kind!r}")


def serialize_model(model) -> dict:
    """Inverse of parse_model on table-like values (bit-exact rationals)."""
    if isinstance(model, IntersectionTable):
        return {
            "kind": "table",
            "label": model.label,
            "n": model.n,
            "AE": [format_rational(x) for x in model.ae],
            "KAE": [format_rational(x) for x in model.kae],
            "epsilon": format_rational(model.epsilon),
        }
    if isinstance(model, MixedTable):
        return {
            "kind": "mixed-table",
            "label": model.label,
            "n": model.n,
            "AE": [format_rational(x) for x in model.ae],
            "KAE": [format_rational(x) for x in model.kae],
            "MIX": {
                ",".join(map(str, k)): format_rational(v)
                for k, v in sorted(model.mixed.items())
            },
            "KMIX": {
                ",".join(map(str, k)): format_rational(v)
                for k, v in sorted(model.kmixed.items())
            },
            "epsilon": format_rational(model.epsilon),
        }
    from .toric import serialize_toric_model

    return serialize_toric_model(model)


def to_json(model) -> str:
    return json.dumps(serialize_model(model), indent=2) + "\n"


def validate(table) -> Diagnostics:
    """Hypothesis checks for a parsed table; errors block downstream work."""
    entries: list[Diagnostic] = []
    if isinstance(table, MixedTable):
        base = table.specialize(0)
        for k in range(table.n + 1):
            if base.ae[k] != table.ae[k]:
                entries.append(
                    Diagnostic("error", f"MIX j=0 slice disagrees with AE at k={k}")
                )
        for k in range(table.n):
            if base.kae[k] != table.kae[k]:
                entries.append(
                    Diagnostic("error", f"KMIX j=0 slice disagrees with KAE at k={k}")
                )
        table = table.base_table()
    if table.ae[0] <= 0:
        entries.append(
            Diagnostic("error", f"not big: top self-intersection {format_rational(table.ae[0])} <= 0")
        )
    if table.epsilon <= 0:
        entries.append(
            Diagnostic("error", f"nef threshold {format_rational(table.epsilon)} <= 0")
        )
    elif table.ae[0] > 0 and table.alpha0_value(table.epsilon) < 0:
        entries.append(
            Diagnostic(
                "warn",
                "alpha0 negative before threshold: user-supplied epsilon looks inconsistent",
            )
        )
    if table.n == 1:
        entries.append(Diagnostic("warn", "n=1 degenerate conventions apply"))
    return Diagnostics(tuple(entries))
