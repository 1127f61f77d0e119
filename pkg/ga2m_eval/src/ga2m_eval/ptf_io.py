"""Read and write threshold-form polynomials in the published JSON schema.

The schema is the interchange format of the ``ptfc`` command line tool:
``{"n": int, "encoding": "01", "terms": [{"vars": [...], "coeff": "..."}]}``
with 1-based, strictly increasing variable lists and decimal-string
coefficients.  This module deliberately does not import the producing
package; files are the only coupling.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Dict, FrozenSet, Tuple

import numpy as np

from .errors import InputError

Support = FrozenSet[int]
Terms = Dict[Support, float]


def _check_vars(vars_list, n: int) -> Tuple[int, ...]:
    if not isinstance(vars_list, list):
        raise InputError("term 'vars' must be a list")
    out = []
    for v in vars_list:
        if not isinstance(v, int) or not 1 <= v <= n:
            raise InputError(f"variable index {v!r} out of range 1..{n}")
        out.append(v - 1)
    t = tuple(out)
    if any(a >= b for a, b in zip(t, t[1:])):
        raise InputError("term 'vars' must be strictly increasing")
    return t


def load_ptf_json(path) -> Tuple[int, Terms]:
    """Load a polynomial file; returns (n, {support: coefficient})."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    return parse_ptf(doc)


def parse_ptf(doc) -> Tuple[int, Terms]:
    if not isinstance(doc, dict):
        raise InputError("polynomial document must be a JSON object")
    n = doc.get("n")
    if not isinstance(n, int) or n < 1:
        raise InputError("'n' must be a positive integer")
    if doc.get("encoding") != "01":
        raise InputError("only the '01' encoding is supported")
    terms: Terms = {}
    for item in doc.get("terms", []):
        if not isinstance(item, dict) or "vars" not in item or "coeff" not in item:
            raise InputError("each term needs 'vars' and 'coeff'")
        sup = frozenset(_check_vars(item["vars"], n))
        if sup in terms:
            raise InputError("duplicate term support")
        try:
            coeff = float(Fraction(str(item["coeff"])))
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"bad coefficient {item['coeff']!r}") from exc
        if coeff != 0.0:
            terms[sup] = coeff
    return n, terms


def terms_to_doc(n: int, terms: Terms) -> dict:
    items = []
    for sup in sorted(terms, key=lambda s: (len(s), sorted(s))):
        coeff = terms[sup]
        if coeff == 0.0:
            continue
        items.append(
            {"vars": [v + 1 for v in sorted(sup)], "coeff": repr(float(coeff))}
        )
    return {"n": n, "encoding": "01", "terms": items}


def write_ptf_json(path, n: int, terms: Terms) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(terms_to_doc(n, terms), fh, indent=1)
        fh.write("\n")


def interaction_supports(terms: Terms) -> set:
    """Supports of the degree-two terms with nonzero coefficient."""
    return {sup for sup, c in terms.items() if len(sup) == 2 and c != 0.0}


def evaluate_terms(n: int, terms: Terms, bits: np.ndarray) -> np.ndarray:
    """Evaluate the polynomial on a (rows, n) 0/1 matrix."""
    bits = np.asarray(bits)
    if bits.ndim != 2 or bits.shape[1] != n:
        raise InputError(f"expected a (rows, {n}) matrix")
    out = np.zeros(bits.shape[0], dtype=float)
    for sup, coeff in terms.items():
        if sup:
            idx = sorted(sup)
            out += coeff * bits[:, idx].prod(axis=1)
        else:
            out += coeff
    return out
