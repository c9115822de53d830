"""Plain-dict codecs for the JSON shapes used by scenarios and reports.

Rationals may be given as numbers or "p/q" strings; complex numbers are [re, im].
"""
from fractions import Fraction
from typing import Any

import numpy as np

from qtheta.errors import QThetaError, ScenarioError
from qtheta.finite_ext import CoboundaryTwist, Cochain, ExtendedLattice, FiniteAbelianGroup, kernel_d0
from qtheta.heisenberg import Multiplier, TorusHeisenbergElement
from qtheta.kaehler import SiegelPoint
from qtheta.lattices import LatticeEmbedding, SymplecticSpace
from qtheta.torus_algebra import QuantizationForm, TorusCharacterAction, TorusElement


def _fail(what: str, exc: Exception) -> ScenarioError:
    return ScenarioError(f"invalid {what}: {exc}")


def parse_rational(value: Any) -> Fraction:
    if isinstance(value, bool):
        raise ScenarioError(f"expected a number, got {value!r}")
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise _fail("rational", exc) from None
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value)
    raise ScenarioError(f"expected a number or 'p/q' string, got {value!r}")


def complex_to_json(z: complex) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def complex_from_json(value: Any) -> complex:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ScenarioError(f"complex numbers are [re, im], got {value!r}")
    return complex(float(value[0]), float(value[1]))


def _rational_matrix(rows: Any, what: str) -> list[list[Fraction]]:
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise ScenarioError(f"{what} must be a non-empty list of lists")
    return [[parse_rational(v) for v in row] for row in rows]


# ---------------------------------------------------------------------------
#  Lattices
# ---------------------------------------------------------------------------

def load_space(obj: dict) -> SymplecticSpace:
    try:
        n = int(obj["N"])
        if "A" in obj:
            space = SymplecticSpace.from_matrix(_rational_matrix(obj["A"], "A"))
            if space.N != n:
                raise ScenarioError(f"A is {space.dim}x{space.dim} but N = {n}")
            return space
        return SymplecticSpace.standard(n)
    except ScenarioError:
        raise
    except (KeyError, TypeError, ValueError, QThetaError) as exc:
        raise _fail("symplectic space", exc) from None


def load_lattice(obj: dict) -> LatticeEmbedding:
    """{"N", "A" (optional), "generators": list of columns}."""
    space = load_space(obj)
    try:
        columns = _rational_matrix(obj["generators"], "generators")
        return LatticeEmbedding.from_columns(space, columns)
    except ScenarioError:
        raise
    except (KeyError, TypeError, ValueError, QThetaError) as exc:
        raise _fail("lattice", exc) from None


def dump_lattice(D: LatticeEmbedding) -> dict:
    if D.exact is not None:
        columns = [[str(v) for v in D.exact[:, j]] for j in range(D.rank)]
    else:
        columns = D.generators.T.tolist()
    out = {"N": D.space.N, "generators": columns}
    if not D.space.is_standard():
        out["A"] = D.space.matrix.tolist()
    return out


def load_extended_lattice(obj: dict) -> ExtendedLattice:
    """{"N", "orders", "generators": [{"v", "a", "l"}]}."""
    try:
        space = SymplecticSpace.standard(int(obj["N"]))
        group = FiniteAbelianGroup(tuple(int(m) for m in obj.get("orders", [])))
        generators = [
            ([parse_rational(v) for v in g["v"]], [int(x) for x in g.get("a", [])], [int(x) for x in g.get("l", [])])
            for g in obj["generators"]
        ]
        return ExtendedLattice.build(space, group, generators)
    except ScenarioError:
        raise
    except (KeyError, TypeError, ValueError, QThetaError) as exc:
        raise _fail("extended lattice", exc) from None

def dump_extended_lattice(D: ExtendedLattice) -> dict:
    generators = []
    for j in range(D.rank):
        v = [str(x) for x in D.exact[:, j]] if D.exact is not None else D.vectors[:, j].tolist()
        generators.append({"v": v, "a": D.a_part[:, j].tolist(), "l": D.l_part[:, j].tolist()})
    return {"N": D.N, "orders": list(D.group.orders), "generators": generators}


def _cochain_key(item: dict, lattice: ExtendedLattice | None) -> tuple[int, ...]:
    if "rep" not in item:
        return tuple(int(v) for v in item["coset"])
    if lattice is None:
        raise ScenarioError("cochain entries keyed by 'rep' need an extended lattice")
    key = lattice.key(tuple(int(v) for v in item["rep"]))
    if "coset" in item and tuple(int(v) for v in item["coset"]) != key:
        raise ScenarioError(f"rep {item['rep']} maps to coset {list(key)}, not {item['coset']}")
    return key


def load_cochain(obj: dict, lattice: ExtendedLattice | None = None) -> Cochain:
    """{"values": [{"coset": [a..., l...] or "rep": [n...], "c": [re, im]}]}.

    A coset of D0 is named by its image (a..., l...) in F x F^; with a lattice, a
    representative n in Z^2N may be given instead and is mapped through D.key.
    """
    try:
        return Cochain({_cochain_key(item, lattice): complex_from_json(item["c"]) for item in obj["values"]})
    except ScenarioError:
        raise
    except (KeyError, TypeError, ValueError, QThetaError) as exc:
        raise _fail("cochain", exc) from None


def dump_cochain(c: Cochain, lattice: ExtendedLattice | None = None) -> dict:
    reps = {lattice.key(rep): rep for rep in kernel_d0(lattice).representatives} if lattice is not None else {}
    values = []
    for key, value in sorted(c.values.items()):
        item = {"coset": list(key), "c": complex_to_json(value)}
        if key in reps:
            item["rep"] = list(reps[key])
        values.append(item)
    return {"values": values}


# ---------------------------------------------------------------------------
#  Siegel points, torus elements, multipliers
# ---------------------------------------------------------------------------

def load_siegel(obj: dict) -> SiegelPoint:
    try:
        imag = np.asarray(obj["T_im"], dtype=float)
        real = np.asarray(obj["T_re"], dtype=float) if "T_re" in obj else np.zeros_like(imag)
        if real.shape != imag.shape:
            raise ScenarioError("T_re and T_im must have the same shape")
        return SiegelPoint.from_parts(real, imag)
    except ScenarioError:
        raise
    except (KeyError, TypeError, ValueError, QThetaError) as exc:
        raise _fail("Siegel point", exc) from None


def dump_siegel(p: SiegelPoint) -> dict:
    return {"T_re": p.T.real.tolist(), "T_im": p.T.imag.tolist()}


def dump_torus_element(a: TorusElement) -> dict:
    """{"A_D", "terms", "twist" (optional)}; a coboundary twist is stored as its lattice and cochain."""
    out = {
        "A_D": a.form.matrix.tolist(),
        "terms": [{"h": list(h), "re": v.real, "im": v.imag} for h, v in sorted(a.terms.items())],
    }
    twist = a.form.twist
    if isinstance(twist, CoboundaryTwist):
        out["twist"] = {
            "extended_lattice": dump_extended_lattice(twist.lattice),
            "cochain": dump_cochain(twist.cochain),
        }
    elif twist is not None:
        raise ScenarioError(f"cannot serialize a {type(twist).__name__} twist")
    return out


def load_torus_element(obj: dict) -> TorusElement:
    try:
        twist = None
        if "twist" in obj:
            lattice = load_extended_lattice(obj["twist"]["extended_lattice"])
            twist = CoboundaryTwist(lattice, load_cochain(obj["twist"]["cochain"], lattice))
        form = QuantizationForm(np.asarray(obj["A_D"], dtype=float), twist)
        terms = {tuple(int(v) for v in t["h"]): complex(float(t["re"]), float(t["im"])) for t in obj["terms"]}
        return TorusElement(form, terms)
    except (KeyError, TypeError, ValueError, QThetaError) as exc:
        raise _fail("torus element", exc) from None


def dump_multiplier(m: Multiplier) -> dict:
    return {
        "B_basis": m.basis.T.tolist(),
        "lifts": [
            {"c": complex_to_json(el.c), "w": [complex_to_json(v) for v in el.x.w], "g": list(el.g)}
            for el in m.lifts
        ],
    }


def load_multiplier(obj: dict, form: QuantizationForm) -> Multiplier:
    """B_basis lists the generators of B in D coordinates."""
    try:
        basis = np.asarray(obj["B_basis"], dtype=np.int64).reshape(-1, form.rank).T
        lifts = tuple(
            TorusHeisenbergElement(
                form,
                complex_from_json(item["c"]),
                TorusCharacterAction(np.array([complex_from_json(v) for v in item["w"]])),
                tuple(int(v) for v in item["g"]),
            )
            for item in obj["lifts"]
        )
        return Multiplier(form, basis, lifts)
    except ScenarioError:
        raise
    except (KeyError, TypeError, ValueError, QThetaError) as exc:
        raise _fail("multiplier", exc) from None
