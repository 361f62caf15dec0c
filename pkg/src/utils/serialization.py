"""JSON codecs for exact values.

Rationals travel as ``"num/den"`` strings (``"n"`` for integers), points as
``{"rational": [...]}`` or ``{"rur": {"f": ..., "g": [...], "sigma": [...]}}``
with RUR polynomials written in the variable ``t``.
"""
import json
from typing import Sequence

from sympy import Poly, QQ, Rational, Symbol

from core.algebra import RationalPoint, RurPoint, T, ThomEncoding, canonical, format_polynomial, parse_polynomial
from core.errors import InputError

_RUR_VARIABLE = 't'


def rational_to_str(value) -> str:
    value = Rational(value)
    return str(value.p) if value.q == 1 else f"{value.p}/{value.q}"


def rational_from_str(text) -> Rational:
    try:
        return Rational(str(text).strip())
    except (TypeError, ValueError, SyntaxError) as e:
        raise InputError(f"{text!r} is not a rational number") from e


def _univariate_to_str(poly: Poly) -> str:
    return format_polynomial(Poly(poly.as_expr().subs(T, Symbol(_RUR_VARIABLE)), Symbol(_RUR_VARIABLE), domain=QQ))


def _univariate_from_str(text) -> Poly:
    return Poly(parse_polynomial(text, [_RUR_VARIABLE]).as_expr().subs(Symbol(_RUR_VARIABLE), T), T, domain=QQ)


def point_to_json(point) -> dict:
    if isinstance(point, RurPoint):
        return {"rur": {
            "f": _univariate_to_str(point.f),
            "g": [_univariate_to_str(g) for g in point.g],
            "sigma": list(point.sigma.signs),
        }}
    return {"rational": [rational_to_str(c) for c in point.coords]}


def point_from_json(data):
    """Inverse of ``point_to_json``; also accepts a bare list of rationals."""
    if isinstance(data, (list, tuple)):
        return RationalPoint(tuple(rational_from_str(c) for c in data))
    if not isinstance(data, dict):
        raise InputError(f"not a point: {data!r}")
    if "rational" in data:
        return RationalPoint(tuple(rational_from_str(c) for c in data["rational"]))
    if "rur" in data:
        rur = data["rur"]
        try:
            f = _univariate_from_str(rur["f"])
            g = tuple(_univariate_from_str(text) for text in rur["g"])
            sigma = ThomEncoding(f, tuple(int(s) for s in rur["sigma"]))
            return canonical(RurPoint(f, g, sigma))
        except KeyError as e:
            raise InputError(f"RUR point misses {e}") from e
        except ValueError as e:
            raise InputError(f"invalid RUR point: {e}") from e
    raise InputError("a point needs a 'rational' or 'rur' entry")


def points_from_json(data) -> list:
    if isinstance(data, dict):
        data = data.get("points")
    if not isinstance(data, list):
        raise InputError("a points document is a list of points (or {\"points\": [...]})")
    return [point_from_json(p) for p in data]


def points_to_json(points: Sequence) -> dict:
    return {"points": [point_to_json(p) for p in points]}


def dumps(document) -> str:
    """Deterministic rendering: sorted keys, two-space indent, trailing newline."""
    return json.dumps(document, sort_keys=True, indent=2) + "\n"
