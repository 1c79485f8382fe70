"""Command-line front end.

Exit codes: 0 success, 1 internal error, 2 validation failure or malformed
input, 3 infeasible or unknown solver outcome.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import __version__
from .io import (InputError, dumps, load_json, policy_from_json, problem_from_json, problem_to_json,
                 rep_from_json, representation_to_json, write_atomic)
from .numlin import DEFAULT_POLICY, NumericalError

EXIT_OK, EXIT_INTERNAL, EXIT_INVALID, EXIT_INFEASIBLE = 0, 1, 2, 3


class CommandFailure(Exception):
    def __init__(self, code: int, message: str, payload: dict | None = None):
        super().__init__(message)
        self.code = code
        self.payload = payload or {}


def _alpha(text: str) -> tuple:
    text = text.strip().strip("{}")
    if not text:
        return ()
    try:
        vals = sorted({int(x) - 1 for x in text.split(",")})
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad subset {text!r}; expected e.g. 1,3") from None
    if any(v < 0 for v in vals):
        raise argparse.ArgumentTypeError("directions are 1-based")
    return tuple(vals)


def _int_list(text: str) -> list:
    return [int(x) for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="woldkit", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"woldkit {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--abs-tol", type=float)
    common.add_argument("--rank-rtol", type=float)
    common.add_argument("--max-iterations", type=int)
    common.add_argument("-o", "--output", help="write the result here instead of stdout")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", parents=[common], help="check a problem file")
    s.add_argument("file")
    s = sub.add_parser("classify", parents=[common], help="isometric / coisometric / doubly commuting flags")
    s.add_argument("file")
    s = sub.add_parser("decompose", parents=[common], help="Wold-type decompositions")
    s.add_argument("file")
    s.add_argument("--mode", choices=["dc", "general", "weak"], default="dc")
    s.add_argument("--alpha", type=_alpha, action="append",
                   help="restrict general mode to these subsets, e.g. --alpha 1,3")
    s.add_argument("--emit-projections", action="store_true")
    s = sub.add_parser("induce", parents=[common], help="the induced representation of π")
    s.add_argument("file")
    s.add_argument("--pi", required=True, help="JSON file with {'dim': d, 'units': {...}}")
    s.add_argument("--levels", type=int, help="level window; omit for an exact finite Fock module")
    s = sub.add_parser("extend", parents=[common], help="unitary extensions for k = 1")
    s.add_argument("file")
    s.add_argument("--mode", choices=["unit2", "eqrep", "construct"], default="eqrep")
    s.add_argument("--bound", type=int, default=10 ** 4)
    s.add_argument("--levels", type=int, default=4)
    s = sub.add_parser("model", parents=[common], help="emit a problem file for an example family")
    s.add_argument("family", choices=["twisted-shift", "automorphism", "graph", "section5"])
    s.add_argument("--k", type=int, default=2)
    s.add_argument("--theta", type=float, action="append",
                   help="twist angles for pairs (2,1), (3,1), (3,2), ...")
    s.add_argument("--d", type=int, default=1, help="multiplicity of the twisted shift")
    s.add_argument("--levels", type=int, default=4)
    s.add_argument("--blocks", type=_int_list, default=[1, 1])
    s.add_argument("--perm", type=_int_list, action="append",
                   help="block permutation of one automorphism, 1-based, e.g. 2,1")
    s.add_argument("--pi", type=_int_list, help="multiplicities of π")
    s.add_argument("--fixture", default="two-vertex",
                   choices=["two-vertex", "loop", "loop-sink", "grid", "nondc", "chain", "spec"])
    s.add_argument("--spec", help="graph spec JSON {'vertices': V, 'edges': [[[s, r], ...], ...]}")
    s.add_argument("--size", type=int, default=3)
    s.add_argument("--name", choices=["nonfaithful", "swap"], default="nonfaithful")
    s.add_argument("--seed", type=int)
    return p


def _policy(args, base=None):
    pol = base or DEFAULT_POLICY
    over = {}
    if args.abs_tol is not None:
        over["abs_tol"] = args.abs_tol
    if args.rank_rtol is not None:
        over["rank_rtol"] = args.rank_rtol
    if args.max_iterations is not None:
        over["max_iterations"] = args.max_iterations
    return policy_from_json(over, "/", base=pol) if over else pol


def _load(args):
    obj = load_json(args.file)
    prob = problem_from_json(obj)
    pol = _policy(args, prob.pol)
    if pol is not prob.pol:
        # per-flag overrides win over the file
        obj = dict(obj)
        obj["tolerance"] = pol.as_dict()
        prob = problem_from_json(obj)
    return prob


def _need_rep(prob):
    if prob.rep is None:
        raise InputError("this command needs a representation", "/representation")
    return prob.rep


def _validation(prob):
    from .prodsys import validate_product_system
    from .reps import validate_covariant_rep

    rep = validate_product_system(prob.system, prob.pol)
    if prob.rep is not None:
        rep = rep.merged(validate_covariant_rep(prob.rep), prefix="representation: ")
    return rep


def _require_valid(prob):
    v = _validation(prob)
    if not v.passed:
        raise CommandFailure(EXIT_INVALID, "validation failed: " + ", ".join(sorted(v.violations)),
                             {"validation": v.as_dict()})
    return v


def cmd_validate(args):
    prob = _load(args)
    v = _validation(prob)
    payload = {"validation": v.as_dict(), "k": prob.system.k, "dims": list(prob.system.dims())}
    if not v.passed:
        raise CommandFailure(EXIT_INVALID, "validation failed: " + ", ".join(sorted(v.violations)), payload)
    return prob, payload, v.residuals


def cmd_classify(args):
    from .reps import classify, purity_predicate

    prob = _load(args)
    _require_valid(prob)
    rep = _need_rep(prob)
    c = classify(rep)
    out = c.as_dict()
    purity = {}
    for j in range(rep.k):
        ok, rho = purity_predicate(rep, j)
        purity[str(j + 1)] = {"pure": ok, "spectral_radius": rho}
    out["purity"] = purity
    out.pop("window", None)
    return prob, out, c.residuals


def cmd_decompose(args):
    from . import wold

    prob = _load(args)
    _require_valid(prob)
    rep = _need_rep(prob)
    try:
        if args.mode == "dc":
            report = wold.wold_dc(rep)
        elif args.mode == "general":
            report = wold.general_decompose(rep, args.alpha)
        else:
            report = wold.weakly_induced_decompose(rep)
    except wold.WoldError as exc:
        raise CommandFailure(EXIT_INVALID, str(exc)) from None
    out = report.as_dict(args.emit_projections)
    res = {"residual_sum": report.residual_sum, "orthogonality": report.orthogonality,
           "p_infty_gap": report.p_infty_gap}
    if not report.passed:
        raise CommandFailure(EXIT_INVALID, "decomposition checks failed", out)
    return prob, out, res


def cmd_induce(args):
    from .fock import induce
    from .reps import classify

    prob = _load(args)
    _require_valid(prob)
    pi = rep_from_json(prob.system.algebra, load_json(args.pi), "")
    try:
        rep = induce(prob.system, pi, args.levels)
    except ValueError as exc:
        raise CommandFailure(EXIT_INVALID, str(exc)) from None
    doc = problem_to_json(prob.system, rep, pi, pol=prob.pol, seed=prob.seed)
    doc["model"] = {"family": "induced", "levels": args.levels, "classify": classify(rep).as_dict()["isometric"]}
    return prob, doc, None


def cmd_extend(args):
    from . import extend
    from .cstar import multiplicity_vector

    prob = _load(args)
    _require_valid(prob)
    ps = prob.system
    if ps.k != 1:
        raise CommandFailure(EXIT_INVALID, "unitary extensions are only available for k = 1")
    M = extend.multiplicity_matrix(ps.correspondences[0], prob.pol)
    if prob.pi is not None:
        m = list(multiplicity_vector(prob.pi, prob.pol))
    elif prob.m is not None:
        m = [int(x) for x in prob.m]
    else:
        raise InputError("extend needs 'pi' or 'm'", "/pi")
    out = {"induction_matrix": M.to_json(), "m": m, "unit1_applies": extend.unit1_applies(M)}
    res = {}
    if args.mode == "unit2":
        ok, bad = extend.unit2_check(M, m)
        out["unit2"] = ok
        out["violations"] = [i + 1 for i in bad]
        return prob, out, res
    cert = extend.eqrep_solve(M, m, args.bound)
    out["certificate"] = cert.as_dict()
    if args.mode == "eqrep":
        if not cert.feasible:
            raise CommandFailure(EXIT_INFEASIBLE, f"{cert.status}: {cert.obstruction or ''}".strip(), out)
        return prob, out, res
    if not cert.feasible:
        raise CommandFailure(EXIT_INFEASIBLE, f"{cert.status}: {cert.obstruction or ''}".strip(), out)
    if prob.pi is None:
        from .cstar import rep_from_multiplicities

        pi = rep_from_multiplicities(ps.algebra, m)
    else:
        pi = prob.pi
    try:
        ext = extend.build_extension(ps, pi, args.levels, cert.m_prime, args.bound)
    except extend.ExtensionError as exc:
        out["extension"] = {"symbolic": True, "reason": str(exc)}
        raise CommandFailure(EXIT_INFEASIBLE, str(exc), out) from None
    out["extension"] = {
        "dim": ext.rep.dim,
        "m_prime": ext.m_prime.to_json(),
        "residuals": {k: float(v) for k, v in ext.residuals.items()},
        "notes": list(ext.notes),
        "representation": representation_to_json(ext.rep),
    }
    return prob, out, ext.residuals


def _phases(args) -> dict:
    k = args.k
    pairs = [(i, j) for i in range(k) for j in range(i)]
    thetas = args.theta or []
    if len(thetas) > len(pairs):
        raise CommandFailure(EXIT_INVALID, f"at most {len(pairs)} angles for k = {k}")
    return {pr: complex(np.exp(1j * th)) for pr, th in zip(pairs, thetas)}


def cmd_model(args):
    from . import models
    from .cstar import FinCStarAlgebra, rep_from_multiplicities

    pol = _policy(args)
    fam = args.family
    meta = {"family": fam}
    if fam == "twisted-shift":
        spec = models.TwistedShiftSpec(args.k, _phases(args), args.d, args.levels)
        rep = models.twisted_shift(spec, pol)
        meta.update({"k": args.k, "theta": list(args.theta or []), "d": args.d, "levels": args.levels})
        doc = problem_to_json(rep.system, rep, pol=pol, seed=args.seed, meta=meta)
    elif fam == "automorphism":
        alg = FinCStarAlgebra(tuple(args.blocks))
        perms = args.perm or [list(range(1, alg.num_blocks + 1))]
        autos = tuple(models.Automorphism(alg, tuple(p - 1 for p in perm)) for perm in perms)
        spec = models.AutomorphismSystemSpec(alg, autos)
        pi = rep_from_multiplicities(alg, args.pi or [1] * alg.num_blocks)
        mod = models.automorphism_induced(spec, pi, args.levels, pol)
        meta.update({"blocks": list(args.blocks), "perm": [list(p) for p in perms], "levels": args.levels,
                     "residuals": {k: float(v) for k, v in mod.residuals.items()}})
        doc = problem_to_json(mod.rep.system, mod.rep, pi, pol=pol, seed=args.seed, meta=meta)
    elif fam == "graph":
        spec = _graph_spec(args)
        rep = models.graph_rep(spec, pol=pol)
        meta.update({"fixture": args.fixture, "graph": spec.to_json()})
        doc = problem_to_json(rep.system, rep, pol=pol, seed=args.seed, meta=meta)
    else:
        fx = models.section5_fixtures()[args.name]
        pi = rep_from_multiplicities(fx.correspondence.algebra, args.pi or fx.m)
        meta.update({"name": fx.name, "expected_status": fx.expected_status,
                     "expected_obstruction": fx.expected_obstruction})
        doc = problem_to_json(fx.system(pol), None, pi, pol=pol, seed=args.seed, meta=meta)
    return None, doc, None


def _graph_spec(args):
    from . import models

    f = args.fixture
    if f == "two-vertex":
        return models.two_vertex_graph()
    if f == "loop":
        return models.loop_graph(args.k)
    if f == "loop-sink":
        return models.disjoint_union(models.loop_graph(1), models.two_vertex_graph())
    if f == "grid":
        return models.grid_graph(args.k, args.size)
    if f == "nondc":
        return models.nondc_graph()
    if f == "chain":
        return models.chain_graph(args.size, args.k)
    if not args.spec:
        raise InputError("--fixture spec needs --spec FILE", "/")
    obj = load_json(args.spec)
    try:
        return models.GraphSpec(int(obj["vertices"]), tuple(tuple(tuple(e) for e in c) for c in obj["edges"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"bad graph spec: {exc}", "/") from None


COMMANDS = {
    "validate": cmd_validate,
    "classify": cmd_classify,
    "decompose": cmd_decompose,
    "induce": cmd_induce,
    "extend": cmd_extend,
    "model": cmd_model,
}


def _report(argv, prob, status, results, residuals, seconds, pol) -> dict:
    return {
        "command": list(argv),
        "version": __version__,
        "tolerance": (prob.pol if prob is not None else pol).as_dict(),
        "status": status,
        "seed": None if prob is None else prob.seed,
        "results": results,
        "residuals": {k: float(v) for k, v in (residuals or {}).items()},
        "timing": {"seconds": round(seconds, 6)},
    }


def _emit(args, text: str) -> None:
    if getattr(args, "output", None):
        write_atomic(args.output, text)
    else:
        sys.stdout.write(text)


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    start = time.perf_counter()
    try:
        prob, payload, residuals = COMMANDS[args.command](args)
    except InputError as exc:
        sys.stderr.write(dumps({"error": exc.detail, "path": exc.path}))
        return EXIT_INVALID
    except CommandFailure as exc:
        status = "invalid" if exc.code == EXIT_INVALID else (
            "unknown" if "unknown" in str(exc) else "infeasible")
        rep = _report(argv, None, status, exc.payload, {}, time.perf_counter() - start, _policy(args))
        rep["error"] = str(exc)
        _emit(args, dumps(rep))
        sys.stderr.write(f"woldkit: {exc}\n")
        return exc.code
    except (NumericalError, ValueError) as exc:
        sys.stderr.write(f"woldkit: {type(exc).__name__}: {exc}\n")
        return EXIT_INVALID
    except Exception as exc:  # noqa: BLE001
        sys.stderr.write(f"woldkit: internal error: {type(exc).__name__}: {exc}\n")
        return EXIT_INTERNAL
    if args.command in ("model", "induce"):
        _emit(args, dumps(payload))
    else:
        _emit(args, dumps(_report(argv, prob, "ok", payload, residuals, time.perf_counter() - start,
                                  _policy(args))))
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
