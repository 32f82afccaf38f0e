"""Command-line front end.

Every subcommand writes one report (JSON, or CSV with ``#`` header lines)
that embeds the resolved configuration and the package version. Exit codes:
0 on success, 2 on configuration errors, 3 when a state, horizon or
precision budget is exhausted.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import json
import sys
from fractions import Fraction

from . import __version__
from . import io as fmt
from .adic_engine import (
    DEFAULT_HORIZON,
    HorizonExceeded,
    Maximal,
    WeightQuery,
    orbit,
    pascal_weight,
    sft_weight,
    sft_weight_in_cylinder,
    successor,
)
from .cocycle_relations import (
    CocycleSpec,
    cocycle_J_plus,
    in_subrelation,
    in_subrelation_two_sided,
    symbol_equivalence_classes,
    two_sided_pair,
)
from .ergodic_lab import (
    ExperimentReport,
    PrecisionBudgetExceeded,
    _jsonable,
    amnesia_experiment,
    definetti_conditional_experiment,
    q_table,
    ratio_limit_experiment,
    weakmix_exploration,
)
from .interval_splitting import LeftRightDependent, Plain, run_and_discrepancy
from .markov_gibbs import (
    MarkovSpec,
    NoConvergence,
    Potential,
    cylinder_measure,
    gibbs_from_potential,
    perron,
    transfer_matrix,
)
from .sft_core import (
    DegenerateAlphabet,
    EnumerationTooLarge,
    NotHomoclinic,
    SequencePoint,
    TransitionMatrix,
    format_word,
    parse_word,
)

EXIT_OK, EXIT_CONFIG, EXIT_BUDGET = 0, 2, 3
BUDGET_ERRORS = (EnumerationTooLarge, HorizonExceeded, PrecisionBudgetExceeded, NoConvergence)
CONFIG_ERRORS = (ValueError, KeyError, TypeError, OSError, json.JSONDecodeError, DegenerateAlphabet, NotHomoclinic)
SERIES_COMMANDS = {"ratio-limit", "definetti", "amnesia", "weakmix", "split", "orbit", "qtable"}


class ConfigError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


# --------------------------------------------------------------------------
# argument resolution
# --------------------------------------------------------------------------


def _need(args, name: str):
    v = getattr(args, name, None)
    if v is None:
        raise ConfigError(f"--{name.replace('_', '-')} is required for '{args.command}'")
    return v


def _matrix(args) -> TransitionMatrix:
    return fmt.load_matrix(_need(args, "matrix"))


def _measure(args, A: TransitionMatrix) -> tuple[MarkovSpec, str]:
    """Measure from --stochastic, --potential or --alpha; Parry otherwise."""
    if args.stochastic:
        return fmt.load_stochastic(args.stochastic, A), "stochastic"
    if args.potential:
        return gibbs_from_potential(A, fmt.load_potential(args.potential, A)), "gibbs"
    if args.alpha is not None:
        a = fmt.parse_number(args.alpha)
        if A.is_full_shift and A.n == 2:
            return MarkovSpec.bernoulli([a, 1 - a]), "bernoulli"
        if A.entries == TransitionMatrix.golden_mean().entries:
            return MarkovSpec.golden_alpha(a), "golden-alpha"
        raise ConfigError("--alpha defines a measure only on the full 2-shift or the golden mean")
    return gibbs_from_potential(A, Potential.constant(A)), "parry"


def _word(text: str | None, n: int | None = None):
    return () if text is None else parse_word(text, n)


def _point(args, prefix_flag: str = "cylinder", n: int | None = None) -> SequencePoint:
    if args.point:
        return fmt.load_point(args.point)
    prefix = getattr(args, prefix_flag)
    return SequencePoint(_word(prefix, n), _word(args.tail_preperiod, n), _word(args.tail_period or "0", n))


def _cocycle(args, n: int) -> CocycleSpec:
    return fmt.load_cocycle(_need(args, "cocycle"), n)


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if v is not None and k not in ("format", "out")}


# --------------------------------------------------------------------------
# subcommands; each returns (result dict, optional csv rows)
# --------------------------------------------------------------------------


def _cmd_validate(args):
    A = _matrix(args)
    return {"n": A.n, "period": A.period, "irreducible": A.irreducible,
            "aperiodic": A.aperiodic, "full_shift": A.is_full_shift}, None


def _spec_doc(spec: MarkovSpec) -> dict:
    return {"kind": spec.kind, "mode": spec.mode,
            "P": [[str(v) for v in row] for row in spec.P],
            "initial": [str(v) for v in spec.initial]}


def _cmd_measure(args):
    A = _matrix(args)
    spec, source = _measure(args, A)
    w = _word(_need(args, "cylinder"), A.n)
    pos = args.position or 0
    if pos and spec.kind != "stationary":
        raise ConfigError("--position needs a stationary measure")
    v = cylinder_measure(spec, w, pos)
    return {"measure": source, "spec": _spec_doc(spec), "cylinder": format_word(w, A.n),
            "position": pos, "value": str(v), "value_float": float(v)}, None


def _cmd_gibbs(args):
    A = _matrix(args)
    phi = fmt.load_potential(_need(args, "potential"), A)
    spec = gibbs_from_potential(A, phi)
    pd = perron(transfer_matrix(A, phi))
    return {"spec": _spec_doc(spec), "perron_eigenvalue_shifted": pd.eigenvalue,
            "perron_residual": pd.residual}, None


def _cmd_successor(args):
    A = _matrix(args)
    x = _point(args, n=A.n)
    y = successor(A, x, args.horizon)
    out = {"point": fmt.dump_point(x, A.n), "point_str": str(x)}
    if y is Maximal:
        out.update(successor="Maximal")
    else:
        out.update(successor=fmt.dump_point(y, A.n), successor_str=str(y))
    return out, None


def _cmd_orbit(args):
    A = _matrix(args)
    x = _point(args, n=A.n)
    pts = orbit(A, x, _need(args, "steps"), args.horizon)
    width = max(len(p.body) for p in pts)
    rows = [["k", "head"]] + [[k, format_word(p.head(width), A.n)] for k, p in enumerate(pts)]
    return {"start": str(x), "length": len(pts), "reached_maximal": len(pts) <= args.steps,
            "orbit": [format_word(p.head(width), A.n) for p in pts]}, rows


def _cmd_weights(args):
    A = _matrix(args)
    counts = fmt.parse_counts(_need(args, "counts"))
    if len(counts) != A.n:
        raise ConfigError(f"--counts needs {A.n} entries")
    q = WeightQuery(sum(counts), counts, args.next)
    out = {"m": q.m, "counts": list(counts), "next": args.next, "weight": sft_weight(A, q)}
    if args.cylinder:
        C = _word(args.cylinder, A.n)
        out["cylinder"] = format_word(C, A.n)
        out["weight_in_cylinder"] = sft_weight_in_cylinder(A, q, C)
        out["ratio"] = str(Fraction(out["weight_in_cylinder"], out["weight"])) if out["weight"] else None
    if A.is_full_shift and args.next is None:
        out["pascal_weight"] = pascal_weight(counts)
    return out, None


def _cmd_transitive(args):
    A = _matrix(args)
    psi = _cocycle(args, A.n) if args.cocycle else None
    res = symbol_equivalence_classes(A, psi, args.bound)
    return {"transitive": res.transitive, "status": res.status.value,
            "classes": [sorted(c) for c in res.classes],
            "cocycle": "none" if psi is None else psi.kind}, None


def _cmd_cocycle(args):
    A = fmt.load_matrix(args.matrix) if args.matrix else None
    n = A.n if A else None
    psi = _cocycle(args, n)
    u, u2 = _word(_need(args, "x"), psi.n), _word(_need(args, "x2"), psi.n)
    if A is not None:
        psi.check(A)
    if args.two_sided:
        origin = args.origin or 0
        jp, jm = two_sided_pair(psi, u, u2, origin)
        return {"two_sided": True, "J_plus": str(jp), "J_minus": str(jm),
                "member": in_subrelation_two_sided(psi, u, u2, origin)}, None
    tail = (_word(args.tail_preperiod, psi.n), _word(args.tail_period or "0", psi.n))
    x, x2 = SequencePoint(u, *tail), SequencePoint(u2, *tail)
    return {"two_sided": False, "x": str(x), "x2": str(x2),
            "J_plus": str(cocycle_J_plus(psi, x, x2)), "member": in_subrelation(psi, x, x2)}, None


def _report(rep: ExperimentReport, extra: dict | None = None):
    out = rep.summary()
    out["metadata"] = _jsonable(rep.metadata)
    if extra:
        out.update(extra)
    rows = [["n", "value"]] + [[n, repr(float(v))] for n, v in rep.series]
    out["series"] = [[n, float(v)] for n, v in rep.series]
    return out, rows


def _cmd_ratio_limit(args):
    A = _matrix(args)
    spec, source = _measure(args, A)
    C = _word(_need(args, "cylinder"), A.n)
    rep = ratio_limit_experiment(A, spec, C, _need(args, "seed"), _need(args, "n"))
    return _report(rep, {"measure": source})


def _cmd_definetti(args):
    A = _matrix(args)
    spec, source = _measure(args, A)
    rep = definetti_conditional_experiment(A, spec, _need(args, "m"), _need(args, "n"), _need(args, "seed"))
    return _report(rep, {"measure": source})


def _cmd_amnesia(args):
    A = _matrix(args)
    spec, source = _measure(args, A)
    rep = amnesia_experiment(spec, fmt.parse_counts(_need(args, "s1")), fmt.parse_counts(_need(args, "s2")),
                             _need(args, "seed"), _need(args, "m"), args.last1, args.last2)
    return _report(rep, {"measure": source})


def _cmd_qtable(args):
    A = _matrix(args)
    spec, source = _measure(args, A)
    tab = q_table(spec, _need(args, "m"))
    rows = [["i", "j", "s", "Q"]]
    for (i, j, s), v in sorted(tab.values.items()):
        rows.append([i, j, ",".join(map(str, s)), str(v)])
    return {"measure": source, "m": tab.m, "entries": len(tab.values),
            "total_probability": {str(k): str(v) for k, v in sorted(tab.total_probability().items())},
            "marginal": str(tab.marginal())}, rows


def _cmd_weakmix(args):
    rep = weakmix_exploration(_need(args, "alpha"), _need(args, "theta"), _need(args, "m"),
                              _need(args, "seed"), args.max_digits)
    return _report(rep)


def _cmd_split(args):
    steps = _need(args, "steps")
    if args.alpha_left is not None or args.alpha_right is not None:
        variant = LeftRightDependent(fmt.parse_number(_need(args, "alpha_left")),
                                     fmt.parse_number(_need(args, "alpha_right")))
    else:
        variant = Plain(fmt.parse_number(_need(args, "alpha")))
    exact = not args.float
    state, disc = run_and_discrepancy(variant, steps, exact)
    rows = [["k", "point"]] + [[k, str(p)] for k, p in enumerate(state.points, 1)]
    return {"points": steps, "exact": exact, "star_discrepancy": str(disc),
            "star_discrepancy_float": float(disc)}, rows


COMMANDS = {
    "validate": (_cmd_validate, "check a transition matrix"),
    "measure": (_cmd_measure, "measure of a cylinder"),
    "gibbs": (_cmd_gibbs, "Markov measure of a potential"),
    "successor": (_cmd_successor, "adic successor of a point"),
    "orbit": (_cmd_orbit, "iterate the adic successor"),
    "weights": (_cmd_weights, "count words with given symbol counts"),
    "transitive": (_cmd_transitive, "symbol equivalence classes"),
    "cocycle": (_cmd_cocycle, "cocycle value and subrelation membership"),
    "ratio-limit": (_cmd_ratio_limit, "weight ratios along a sampled point"),
    "definetti": (_cmd_definetti, "conditional block laws along a sampled point"),
    "amnesia": (_cmd_amnesia, "ratio of conditional Q values along a sampled point"),
    "qtable": (_cmd_qtable, "all Q values at one level"),
    "weakmix": (_cmd_weakmix, "fractional parts of theta times Pascal weights"),
    "split": (_cmd_split, "Kakutani interval splitting"),
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("inputs")
    g.add_argument("--matrix", metavar="FILE", help="transition matrix JSON")
    g.add_argument("--potential", metavar="FILE", help="potential JSON")
    g.add_argument("--cocycle", metavar="FILE", help="cocycle JSON")
    g.add_argument("--stochastic", metavar="FILE", help="stochastic matrix JSON")
    g.add_argument("--point", metavar="FILE", help="point JSON")
    p = common.add_argument_group("parameters")
    p.add_argument("--alpha", metavar="R")
    p.add_argument("--alpha-left", metavar="R")
    p.add_argument("--alpha-right", metavar="R")
    p.add_argument("--theta", metavar="R")
    p.add_argument("--cylinder", metavar="WORD")
    p.add_argument("--tail-preperiod", metavar="WORD")
    p.add_argument("--tail-period", metavar="WORD")
    p.add_argument("--x", metavar="WORD")
    p.add_argument("--x2", metavar="WORD")
    p.add_argument("--counts", metavar="C0,C1,...")
    p.add_argument("--s1", metavar="C0,C1,...")
    p.add_argument("--s2", metavar="C0,C1,...")
    p.add_argument("--last1", type=int)
    p.add_argument("--last2", type=int)
    p.add_argument("--next", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--steps", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--position", type=int)
    p.add_argument("--origin", type=int)
    p.add_argument("--bound", type=int)
    p.add_argument("--horizon", type=int, default=DEFAULT_HORIZON)
    p.add_argument("--max-digits", type=int, default=100_000)
    p.add_argument("--two-sided", action="store_true", default=None)
    p.add_argument("--float", action="store_true", default=None)
    o = common.add_argument_group("output")
    o.add_argument("--out", metavar="FILE")
    o.add_argument("--format", choices=("csv", "json"))

    parser = _Parser(prog="shiftlab", description="Shifts of finite type, adic maps and Gibbs measures.")
    parser.add_argument("--version", action="version", version=f"shiftlab {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    for name, (_fn, help_text) in COMMANDS.items():
        sub.add_parser(name, parents=[common], help=help_text, description=help_text)
    return parser


def render(command: str, config: dict, result: dict, rows, fmt_name: str) -> str:
    """Serialize a report; deterministic for identical inputs."""
    if fmt_name == "json":
        doc = {"command": command, "version": __version__, "config": config, "result": result}
        return json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n"
    buf = _io.StringIO()
    buf.write(f"# shiftlab {__version__}\n")
    buf.write("# config: " + json.dumps(_jsonable(config), sort_keys=True) + "\n")
    summary = {k: v for k, v in result.items() if k != "series"}
    buf.write("# result: " + json.dumps(_jsonable(summary), sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    if rows is None:
        rows = [["key", "value"]] + [[k, v if isinstance(v, str) else json.dumps(_jsonable(v), sort_keys=True)]
                                     for k, v in sorted(summary.items())]
    w.writerows(rows)
    return buf.getvalue()


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_CONFIG
    fmt_name = args.format or ("csv" if args.command in SERIES_COMMANDS else "json")
    config = _config(args)
    config["format"] = fmt_name
    fn = COMMANDS[args.command][0]
    try:
        result, rows = fn(args)
    except BUDGET_ERRORS as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    text = render(args.command, config, result, rows, fmt_name)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
