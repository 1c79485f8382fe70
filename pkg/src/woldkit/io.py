"""JSON encoding of algebras, representations, correspondences and problems.

Complex numbers are ``[re, im]`` pairs, matrices are lists of rows, and all
labels in JSON (blocks, matrix units, directions) are 1-based.
"""

from __future__ import annotations

import json
import os
import tempfile
from importlib import resources

import numpy as np

from .cstar import AlgebraRep, FinCStarAlgebra


class InputError(ValueError):
    """Malformed input; ``path`` is a JSON pointer to the offending location."""

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path or '/'}: {message}")
        self.path = path or "/"
        self.detail = message


def _clean(x: float) -> float:
    x = float(x)
    return 0.0 if x == 0 else x


def complex_to_json(z) -> list:
    z = complex(z)
    return [_clean(z.real), _clean(z.imag)]


def complex_from_json(obj, path: str) -> complex:
    if isinstance(obj, (int, float)) and not isinstance(obj, bool):
        return complex(obj)
    if (isinstance(obj, list) and len(obj) == 2
            and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj)):
        return complex(obj[0], obj[1])
    raise InputError("expected a complex number [re, im]", path)


def matrix_to_json(m: np.ndarray) -> list:
    m = np.asarray(m)
    return [[complex_to_json(v) for v in row] for row in m]


def matrix_from_json(obj, path: str, shape=None) -> np.ndarray:
    if not isinstance(obj, list) or not all(isinstance(r, list) for r in obj):
        raise InputError("expected a matrix (list of rows)", path)
    rows = len(obj)
    cols = len(obj[0]) if rows else (shape[1] if shape else 0)
    out = np.zeros((rows, cols), dtype=complex)
    for i, row in enumerate(obj):
        if len(row) != cols:
            raise InputError(f"row has {len(row)} entries, expected {cols}", f"{path}/{i}")
        for j, v in enumerate(row):
            out[i, j] = complex_from_json(v, f"{path}/{i}/{j}")
    if shape is not None and out.shape != tuple(shape):
        if not (out.size == 0 and 0 in shape):
            raise InputError(f"matrix has shape {out.shape}, expected {tuple(shape)}", path)
        out = np.zeros(shape, dtype=complex)
    return out


def unit_label(unit) -> str:
    b, p, q = unit
    return f"{b + 1},{p + 1},{q + 1}"


def _parse_label(label: str, n: int, path: str) -> tuple:
    try:
        parts = tuple(int(s) - 1 for s in label.split(","))
    except ValueError:
        raise InputError(f"bad label {label!r}", path) from None
    if len(parts) != n or any(p < 0 for p in parts):
        raise InputError(f"bad label {label!r}", path)
    return parts


def units_to_json(algebra: FinCStarAlgebra, arr: np.ndarray) -> dict:
    return {unit_label(u): matrix_to_json(arr[i]) for i, u in enumerate(algebra.units)}


def units_from_json(algebra: FinCStarAlgebra, obj, dim: int, path: str) -> np.ndarray:
    if not isinstance(obj, dict):
        raise InputError("expected an object keyed by matrix units 'b,p,q'", path)
    out = np.zeros((algebra.dim, dim, dim), dtype=complex)
    for label, m in obj.items():
        sub = f"{path}/{label}"
        u = _parse_label(label, 3, sub)
        if u not in algebra.unit_index:
            raise InputError(f"no matrix unit {label} in this algebra", sub)
        out[algebra.unit_index[u]] = matrix_from_json(m, sub, (dim, dim))
    missing = [unit_label(u) for u in algebra.units if unit_label(u) not in obj]
    if missing:
        raise InputError(f"missing images for matrix units {missing}", path)
    return out


def algebra_element_to_json(algebra: FinCStarAlgebra, x: np.ndarray) -> dict:
    return {unit_label(u): complex_to_json(x[i]) for i, u in enumerate(algebra.units) if x[i] != 0}


def algebra_element_from_json(algebra: FinCStarAlgebra, obj, path: str) -> np.ndarray:
    if not isinstance(obj, dict):
        raise InputError("expected an algebra element {'b,p,q': [re, im]}", path)
    out = np.zeros(algebra.dim, dtype=complex)
    for label, v in obj.items():
        sub = f"{path}/{label}"
        u = _parse_label(label, 3, sub)
        if u not in algebra.unit_index:
            raise InputError(f"no matrix unit {label} in this algebra", sub)
        out[algebra.unit_index[u]] = complex_from_json(v, sub)
    return out


def algebra_from_json(obj, path: str = "/algebra") -> FinCStarAlgebra:
    if not isinstance(obj, dict) or "blocks" not in obj:
        raise InputError("expected {'blocks': [n1, ...]}", path)
    blocks = obj["blocks"]
    if (not isinstance(blocks, list) or not blocks
            or not all(isinstance(n, int) and not isinstance(n, bool) and n > 0 for n in blocks)):
        raise InputError("blocks must be a nonempty list of positive integers", f"{path}/blocks")
    return FinCStarAlgebra(tuple(blocks))


def rep_to_json(sigma: AlgebraRep) -> dict:
    return {"dim": sigma.space_dim, "units": units_to_json(sigma.algebra, sigma.images)}


def rep_from_json(algebra: FinCStarAlgebra, obj, path: str) -> AlgebraRep:
    if not isinstance(obj, dict) or "dim" not in obj or "units" not in obj:
        raise InputError("expected {'dim': d, 'units': {...}}", path)
    d = obj["dim"]
    if not isinstance(d, int) or isinstance(d, bool) or d < 0:
        raise InputError("dim must be a nonnegative integer", f"{path}/dim")
    return AlgebraRep(algebra, d, units_from_json(algebra, obj["units"], d, f"{path}/units"))


def correspondence_from_json(algebra: FinCStarAlgebra, obj, path: str):
    from .corr import Correspondence

    if not isinstance(obj, dict):
        raise InputError("expected a correspondence object", path)
    for key in ("dim", "right", "left", "inner"):
        if key not in obj:
            raise InputError(f"missing field {key!r}", path)
    d = obj["dim"]
    if not isinstance(d, int) or isinstance(d, bool) or d < 0:
        raise InputError("dim must be a nonnegative integer", f"{path}/dim")
    right = units_from_json(algebra, obj["right"], d, f"{path}/right")
    left = units_from_json(algebra, obj["left"], d, f"{path}/left")
    inner = np.zeros((d, d, algebra.dim), dtype=complex)
    if not isinstance(obj["inner"], dict):
        raise InputError("expected an object keyed by 'p,q'", f"{path}/inner")
    for label, v in obj["inner"].items():
        sub = f"{path}/inner/{label}"
        p, q = _parse_label(label, 2, sub)
        if p >= d or q >= d:
            raise InputError(f"basis index out of range in {label!r}", sub)
        inner[p, q] = algebra_element_from_json(algebra, v, sub)
    return Correspondence(algebra, d, right, left, inner)


def schema(name: str) -> dict:
    """Load one of the shipped JSON schemas ('problem' or 'report')."""
    text = resources.files("woldkit").joinpath("schema", f"{name}.schema.json").read_text()
    return json.loads(text)


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".woldkit-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# --- problem documents ----------------------------------------------------------

class Problem:
    """A parsed problem file: product system, optional representation, π and tolerances."""

    def __init__(self, system, rep=None, pi=None, m=None, pol=None, seed=None, meta=None):
        self.system = system
        self.rep = rep
        self.pi = pi
        self.m = m
        self.pol = pol
        self.seed = seed
        self.meta = meta or {}


def policy_from_json(obj, path: str = "/tolerance", base=None):
    from .numlin import DEFAULT_POLICY, TolerancePolicy

    base = base or DEFAULT_POLICY
    if obj is None:
        return base
    if not isinstance(obj, dict):
        raise InputError("expected a tolerance object", path)
    vals = base.as_dict()
    for key in ("abs_tol", "rank_rtol", "max_iterations"):
        if key in obj:
            vals[key] = obj[key]
    try:
        return TolerancePolicy(float(vals["abs_tol"]), float(vals["rank_rtol"]), int(vals["max_iterations"]))
    except ValueError as exc:
        raise InputError(str(exc), path) from None


def _flip_key(label: str, k: int, path: str) -> tuple:
    i, j = _parse_label(label, 2, path)
    if not (j < i < k):
        raise InputError(f"flip key {label!r} must be 'i,j' with k ≥ i > j ≥ 1", path)
    return i, j


def representation_to_json(rep) -> dict:
    trunc = None
    if rep.window and "levels" in rep.window:
        trunc = {"levels": rep.window["levels"], "grading": list(rep.window["grading"])}
    return {
        "sigma": rep_to_json(rep.sigma),
        "T": [matrix_to_json(t) for t in rep.tmaps],
        "truncation": trunc,
    }


def representation_from_json(system, obj, path: str, pol):
    from .reps import CovariantRep

    if not isinstance(obj, dict) or "sigma" not in obj or "T" not in obj:
        raise InputError("expected {'sigma': ..., 'T': [...], 'truncation': ...}", path)
    sigma = rep_from_json(system.algebra, obj["sigma"], f"{path}/sigma")
    ts = obj["T"]
    if not isinstance(ts, list) or len(ts) != system.k:
        raise InputError(f"expected a list of {system.k} matrices", f"{path}/T")
    n = sigma.space_dim
    maps = tuple(matrix_from_json(t, f"{path}/T/{i}", (n, system.correspondences[i].dim * n))
                 for i, t in enumerate(ts))
    trunc = obj.get("truncation")
    interior = window = None
    if trunc is not None:
        sub = f"{path}/truncation"
        if not isinstance(trunc, dict) or "levels" not in trunc or "grading" not in trunc:
            raise InputError("expected {'levels': N, 'grading': [...]}", sub)
        grading = trunc["grading"]
        if not isinstance(grading, list) or len(grading) != n:
            raise InputError(f"grading must list {n} levels", f"{sub}/grading")
        levels = trunc["levels"]
        interior = np.diag([1.0 if g < levels else 0.0 for g in grading]).astype(complex)
        window = {"levels": int(levels), "grading": [int(g) for g in grading]}
    return CovariantRep(system, sigma, maps, interior, window, pol)


def problem_to_json(system, rep=None, pi=None, m=None, pol=None, seed=None, meta=None) -> dict:
    out = {
        "algebra": system.algebra.to_json(),
        "correspondences": [E.to_json() for E in system.correspondences],
        "flips": {f"{i + 1},{j + 1}": matrix_to_json(t) for (i, j), t in sorted(system.flips.items())},
    }
    if rep is not None:
        out["representation"] = representation_to_json(rep)
    if pi is not None:
        out["pi"] = rep_to_json(pi)
    if m is not None:
        out["m"] = list(m)
    if pol is not None:
        out["tolerance"] = pol.as_dict()
    if seed is not None:
        out["seed"] = int(seed)
    if meta:
        out["model"] = meta
    return out


def validate_schema(obj, name: str = "problem") -> None:
    import jsonschema

    validator = jsonschema.Draft202012Validator(schema(name))
    errors = sorted(validator.iter_errors(obj), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        path = "/" + "/".join(str(p) for p in err.absolute_path)
        raise InputError(err.message, path)


def problem_from_json(obj, pol=None) -> Problem:
    from .prodsys import ProductSystem, ProductSystemError

    validate_schema(obj, "problem")
    pol = policy_from_json(obj.get("tolerance"), base=pol)
    alg = algebra_from_json(obj["algebra"])
    corrs = [correspondence_from_json(alg, c, f"/correspondences/{i}")
             for i, c in enumerate(obj["correspondences"])]
    k = len(corrs)
    flips = {}
    for label, m in obj.get("flips", {}).items():
        sub = f"/flips/{label}"
        i, j = _flip_key(label, k, sub)
        n = corrs[i].dim * corrs[j].dim
        flips[(i, j)] = matrix_from_json(m, sub, (n, n))
    try:
        system = ProductSystem(corrs, flips, pol)
    except ProductSystemError as exc:
        raise InputError(str(exc), "/flips") from None
    rep = None
    if obj.get("representation") is not None:
        rep = representation_from_json(system, obj["representation"], "/representation", pol)
    pi = rep_from_json(alg, obj["pi"], "/pi") if obj.get("pi") is not None else None
    m = obj.get("m")
    if m is not None and len(m) != alg.num_blocks:
        raise InputError(f"expected {alg.num_blocks} multiplicities", "/m")
    return Problem(system, rep, pi, m, pol, obj.get("seed"), obj.get("model"))


def load_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON: {exc.msg} (line {exc.lineno}, column {exc.colno})", "/") from None
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}", "/") from None
