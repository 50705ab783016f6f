"""``newton-strata`` command line.

Exit codes: 0 success, 2 parse or validation error, 3 precision or
certification failure, 4 search budget exhausted, 1 internal error.
Errors are reported on stderr as ``error: <TypeName>: <message>``.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from .errors import DomainError, InternalError, NewtonStrataError, NotFound, PrecisionExhausted
from .explorer import (SampleConfig, chain_realization, find_witness, newton_from_string,
                       pencil_generic_newton, stratum_census)
from .poset import break_points, codimension, defect, enumerate_poset
from .rootdatum import build_root_datum, format_vector
from .serialize import matrix_to_doc, parse_matrix_file, rational, serialize_matrix, vector
from .series import ENV_MAX_WINDOW
from .sigma import default_conjugation_window, hodge_point, kottwitz_point, newton_point, sigma_conj_solve


def _int_vector(text):
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _rational_vector(text):
    try:
        return tuple(Fraction(x.strip()) for x in text.split(","))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected comma-separated rationals a/b, got {text!r}") from None


def _group(text):
    try:
        return build_root_datum(text)
    except NewtonStrataError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _read(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_matrix_file(fh.read())
    except OSError as exc:
        raise DomainError(f"cannot read {path}: {exc.strerror}") from None


def _emit(args, payload: dict, text: str):
    if args.out == "json":
        print(json.dumps(payload, indent=2))
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _table(header, rows):
    cells = [header] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells) + "\n"


def _set(js):
    return "{" + ",".join(str(j) for j in js) + "}"


def _sample_config(args, mu):
    return SampleConfig(mu, q=args.q, samples=args.samples, seed=args.seed, depth=args.depth,
                        mu1=getattr(args, "mu1", None), budget=args.budget)


def _require_gl(datum):
    if datum.group.family != "GL":
        raise DomainError(f"sampling and witnesses are implemented for GL_n only, not {datum.group.name}")


# ---------------------------------------------------------------------------
# subcommands


def cmd_poset(args):
    poset = enumerate_poset(args.group, args.mu)
    rows = poset.rows()
    payload = {
        "group": args.group.group.name,
        "mu": format_vector(poset.top),
        "kappa": [rational(x) for x in poset.kappa],
        "nodes": [{"nu": format_vector(r["nu"]), "breaks": [str(j) for j in r["breaks"]],
                   "defect": str(r["defect"]), "codim": str(r["codim"]),
                   "delta_to_top": str(r["delta_to_top"])} for r in rows],
        "covers": [[format_vector(a.point), format_vector(b.point)] for a, b in poset.covers()],
        "dot": poset.to_dot(),
    }
    if args.out == "dot":
        sys.stdout.write(poset.to_dot())
        return 0
    table = _table(["nu", "J(nu)", "defect", "codim", "delta"],
                   [[format_vector(r["nu"]), _set(r["breaks"]), r["defect"], r["codim"], r["delta_to_top"]]
                    for r in rows])
    _emit(args, payload, f"{len(rows)} Newton points below {format_vector(poset.top)} in {args.group.group.name}\n"
                         f"{table}\n{poset.to_dot()}")
    return 0


def cmd_analyze(args):
    b = _read(args.infile)
    datum = args.group
    nu = newton_point(b, datum)
    datum = nu.datum
    mu = hodge_point(b, datum)
    kappa = kottwitz_point(b, datum)
    info = {
        "group": datum.group.name,
        "hodge": vector(mu),
        "newton": vector(nu.point),
        "certified": True,
        "kappa": [rational(x) for x in kappa],
        "breaks": [str(j) for j in sorted(break_points(nu))],
        "defect": str(defect(nu, mu)),
        "codim_in_hodge_stratum": str(codimension(nu, mu)),
    }
    text = _table(["field", "value"], [
        ["group", datum.group.name],
        ["hodge", format_vector(mu)],
        ["newton", format_vector(nu.point) + " (certified)"],
        ["kappa", ",".join(rational(x) for x in kappa) or "trivial"],
        ["J(nu)", _set(sorted(break_points(nu)))],
        ["defect", info["defect"]],
        ["codim", info["codim_in_hodge_stratum"]],
    ])
    _emit(args, info, text)
    return 0


def cmd_witness(args):
    _require_gl(args.group)
    v = newton_from_string(args.group, ",".join(str(x) for x in args.nu))
    cfg = _sample_config(args, args.mu)
    res = find_witness(v, args.mu, cfg)
    if res.status == "impossible_by_mazur":
        raise DomainError(f"{v} is not below {format_vector(args.mu)}: no witness can exist")
    if res.status != "found":
        raise NotFound(f"no witness for {v} in K z^{format_vector(args.mu)} K within {cfg.budget} trials")
    verification = {"hodge": vector(res.hodge), "newton": vector(res.newton.point), "certified": True,
                    "trials": str(res.trials)}
    if args.save:
        with open(args.save, "w", encoding="utf-8") as fh:
            fh.write(serialize_matrix(res.matrix))
    text = (serialize_matrix(res.matrix)
            + f"# verification: hodge {format_vector(res.hodge)}, newton {format_vector(res.newton.point)}"
              f" (certified), trials {res.trials}\n")
    _emit(args, {"status": "found", "matrix": matrix_to_doc(res.matrix), "verification": verification}, text)
    return 0


def cmd_census(args):
    _require_gl(args.group)
    mu = args.mu2 or args.mu
    if mu is None:
        raise DomainError("census needs --mu (or --mu2)")
    report = stratum_census(_sample_config(args, mu), workers=args.workers)
    payload = report.to_json()
    rows = [[s["nu"], s["count"], s["frequency"], s["codimension"], s["reference_frequency"], s["corridor"]]
            for s in payload["strata"]]
    text = (f"census of K z^{payload['mu']} K over F_{args.q}: {payload['samples']} samples, seed {args.seed},"
            f" depth {payload['depth']}\n"
            + _table(["nu", "count", "frequency", "codim", "q^-codim", "corridor"], rows)
            + f"uncertified {payload['uncertified']}, Mazur violations {payload['mazur_violations']},"
              f" non-Newton points {payload['non_newton_points']}\n")
    for note in payload["notes"]:
        text += f"note: {note}\n"
    _emit(args, payload, text)
    return 0


def _pencil_json(res):
    return {
        "special": vector(res.special.point),
        "generic": None if res.generic is None else vector(res.generic.point),
        "violations": str(res.violations),
        "anomaly": None if res.anomaly is None else {"kind": res.anomaly.kind, "details": res.anomaly.details},
        "samples": [{"degree": str(d), "t": str(t), "newton": vector(nu.point), "hodge": vector(h)}
                    for d, t, nu, h in res.samples],
    }


def cmd_pencil(args):
    b, d = _read(args.infile), _read(args.direction)
    if b.n != d.n or b.field != d.field:
        raise DomainError("base and direction must share size and field")
    res = pencil_generic_newton(b, d, SampleConfig(hodge_point(b), seed=args.seed), per_degree=args.per_degree)
    payload = _pencil_json(res)
    rows = [[s["degree"], s["t"], format_vector(Fraction(x) for x in s["newton"]),
             format_vector(int(x) for x in s["hodge"])] for s in payload["samples"]]
    generic = "none (anomaly)" if res.generic is None else format_vector(res.generic.point)
    text = (_table(["degree", "t", "newton", "hodge"], rows)
            + f"special {format_vector(res.special.point)}, generic {generic}, violations {res.violations}\n")
    if res.anomaly:
        text += f"anomaly: {res.anomaly.kind}: {res.anomaly.details}\n"
    _emit(args, payload, text)
    return 0


def cmd_chains(args):
    _require_gl(args.group)
    poset = enumerate_poset(args.group, args.mu)
    src = poset.bottom if args.source is None else newton_from_string(args.group, args.source)
    dst = poset.top_point if args.target is None else newton_from_string(args.group, args.target)
    chains = chain_realization(src, dst, args.mu, _sample_config(args, args.mu))
    payload = {"from": vector(src.point), "to": vector(dst.point), "chains": [
        [{"from": vector(s.source.point), "to": vector(s.target.point), "realized": s.success,
          "attempts": str(s.attempts)} for s in chain] for chain in chains]}
    lines = []
    for k, chain in enumerate(chains, 1):
        steps = " ".join(f"{s.source} -{'ok' if s.success else 'FAILED'}->" for s in chain)
        lines.append(f"chain {k}: {steps} {dst}")
    ok = sum(all(s.success for s in c) for c in chains)
    lines.append(f"{ok} of {len(chains)} chains fully realized")
    _emit(args, payload, "\n".join(lines) + "\n")
    return 0


def cmd_conj_solve(args):
    b, b2 = _read(args.infile), _read(args.target)
    window = args.window if args.window is not None else default_conjugation_window(b, args.depth)
    cap = args.max_precision
    if cap is not None and window > cap:
        raise PrecisionExhausted(f"required window {window} exceeds --max-precision {cap}")
    g = sigma_conj_solve(b, b2, args.depth, window=window)
    check = {"window": str(window), "field_degree": str(g.field.e), "verified_mod_z^window": True}
    text = serialize_matrix(g) + f"# verification: g^-1 b sigma(g) = b2 mod z^{window} over F_{g.field.size}\n"
    _emit(args, {"g": matrix_to_doc(g), "verification": check}, text)
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="newton-strata",
                                description="Newton strata in loop groups of split classical groups.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", choices=["json", "text", "dot"], default="text")
    common.add_argument("--max-precision", type=int, default=None,
                        help=f"cap on precision windows (also read from {ENV_MAX_WINDOW})")
    sampling = argparse.ArgumentParser(add_help=False)
    sampling.add_argument("--q", type=int, default=2)
    sampling.add_argument("--samples", type=int, default=1000)
    sampling.add_argument("--seed", type=int, default=0)
    sampling.add_argument("--depth", type=int, default=None)
    sampling.add_argument("--budget", type=int, default=100_000)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("poset", parents=[common], help="enumerate Newton points below mu")
    s.add_argument("--group", type=_group, required=True)
    s.add_argument("--mu", type=_int_vector, required=True)
    s.set_defaults(func=cmd_poset)

    s = sub.add_parser("analyze", parents=[common], help="Hodge point, certified Newton point and kappa of a matrix")
    s.add_argument("--in", dest="infile", required=True)
    s.add_argument("--group", type=_group, default=None)
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("witness", parents=[common, sampling], help="find b with given Newton point in K z^mu K")
    s.add_argument("--group", type=_group, required=True)
    s.add_argument("--mu", type=_int_vector, required=True)
    s.add_argument("--nu", type=_rational_vector, required=True)
    s.add_argument("--save", default=None, help="also write the matrix file here")
    s.set_defaults(func=cmd_witness)

    s = sub.add_parser("census", parents=[common, sampling], help="Newton stratum frequencies in K z^mu K")
    s.add_argument("--group", type=_group, required=True)
    s.add_argument("--mu", type=_int_vector, default=None)
    s.add_argument("--mu1", type=_int_vector, default=None, help="sample the union over mu1 <= mu' <= mu")
    s.add_argument("--mu2", type=_int_vector, default=None, help="alias for --mu")
    s.add_argument("--workers", type=int, default=1)
    s.set_defaults(func=cmd_census)

    s = sub.add_parser("pencil", parents=[common], help="generic Newton point of b + t d")
    s.add_argument("--in", dest="infile", required=True)
    s.add_argument("--dir", dest="direction", required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--per-degree", type=int, default=3)
    s.set_defaults(func=cmd_pencil)

    s = sub.add_parser("chains", parents=[common, sampling], help="realize saturated chains by pencils")
    s.add_argument("--group", type=_group, required=True)
    s.add_argument("--mu", type=_int_vector, required=True)
    s.add_argument("--from", dest="source", default=None)
    s.add_argument("--to", dest="target", default=None)
    s.set_defaults(func=cmd_chains)

    s = sub.add_parser("conj-solve", parents=[common], help="solve g^-1 b sigma(g) = b2 with g = 1 mod z")
    s.add_argument("--in", dest="infile", required=True)
    s.add_argument("--target", required=True)
    s.add_argument("--depth", type=int, required=True, help="congruence depth d: b = b2 mod z^d")
    s.add_argument("--window", type=int, default=None)
    s.set_defaults(func=cmd_conj_solve)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.out == "dot" and args.command != "poset":
        print("error: DomainError: --out dot is only available for poset", file=sys.stderr)
        return 2
    if args.max_precision is not None:
        os.environ[ENV_MAX_WINDOW] = str(args.max_precision)
    try:
        return args.func(args)
    except NewtonStrataError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except (RecursionError, MemoryError, ArithmeticError, ValueError, KeyError, IndexError) as exc:
        err = InternalError(f"{type(exc).__name__}: {exc}")
        print(f"error: InternalError: {err}", file=sys.stderr)
        return err.exit_code


if __name__ == "__main__":
    sys.exit(main())
