"""JSON encoding of the package's data types.

Complex numbers are ``[re, im]`` pairs and matrices are row-major nested
lists of them.  Floats go through ``json`` (shortest round-trip repr), so
parse after print is the identity bit for bit.
"""
from __future__ import annotations

import json
from typing import Any

import numpy as np

from .darboux import DarbouxPoint
from .hat import HatPair
from .rep import AdhmData
from .slice_forms import SliceForm


def complex_to_json(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def complex_from_json(v) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    re, im = v
    return complex(float(re), float(im))


def vector_to_json(v) -> list:
    return [complex_to_json(z) for z in np.asarray(v).ravel()]


def vector_from_json(v) -> np.ndarray:
    return np.array([complex_from_json(z) for z in v], dtype=complex)


def matrix_to_json(M) -> list:
    return [vector_to_json(row) for row in np.atleast_2d(np.asarray(M))]


def matrix_from_json(M) -> np.ndarray:
    rows = [vector_from_json(r) for r in M]
    if not rows:
        return np.zeros((0, 0), dtype=complex)
    return np.vstack(rows)


def adhm_to_json(d: AdhmData) -> dict:
    return {"k": d.k, "tau": complex_to_json(d.tau), "A": matrix_to_json(d.A),
            "B": matrix_to_json(d.B), "i": matrix_to_json(d.i), "j": matrix_to_json(d.j)}


def adhm_from_json(obj) -> AdhmData:
    d = AdhmData(int(obj["k"]), matrix_from_json(obj["A"]), matrix_from_json(obj["B"]),
                 matrix_from_json(obj["i"]), matrix_from_json(obj["j"]),
                 complex_from_json(obj.get("tau", 0)))
    return d


def hat_to_json(h: HatPair) -> dict:
    return {"k": h.k, "tau": complex_to_json(h.tau),
            "Ahat": matrix_to_json(h.Ahat), "Bhat": matrix_to_json(h.Bhat)}


def hat_from_json(obj) -> HatPair:
    Ah = matrix_from_json(obj["Ahat"])
    k = int(obj.get("k", Ah.shape[0] - 1))
    return HatPair(k, Ah, matrix_from_json(obj["Bhat"]), complex_from_json(obj.get("tau", 0)))


def slice_to_json(sf: SliceForm) -> dict:
    return {"r": vector_to_json(sf.r), "s": vector_to_json(sf.s)}


def slice_from_json(obj) -> SliceForm:
    return SliceForm(vector_from_json(obj["r"]), vector_from_json(obj["s"]))


def darboux_to_json(p: DarbouxPoint) -> dict:
    return {"lambda": vector_to_json(p.lam), "mu": vector_to_json(p.mu),
            "lambdahat": vector_to_json(p.lamhat), "muhat": vector_to_json(p.muhat),
            "tau": complex_to_json(p.tau)}


def darboux_from_json(obj) -> DarbouxPoint:
    return DarbouxPoint(vector_from_json(obj["lambda"]), vector_from_json(obj["mu"]),
                        vector_from_json(obj["lambdahat"]), vector_from_json(obj["muhat"]),
                        complex_from_json(obj.get("tau", 0)))


def poly_to_json(coeffs) -> list:
    """Polynomial as its coefficient array, constant term first."""
    return vector_to_json(coeffs)


poly_from_json = vector_from_json


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=1, sort_keys=True, allow_nan=True) + "\n"


def loads(text: str) -> Any:
    return json.loads(text)
