"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 invalid input, 3 internal invariant failure
(a diagnostic bundle with the inputs and the failing assertion is written first).
"""

import argparse
import csv
import io
import json
import sys
import traceback
from pathlib import Path

import numpy as np

from . import serialize as ser
from .arcs import arc_matrix, classify, find_arcs, rank_of_arcs
from .csp import (
    read_wcnf,
    reduce_coordination,
    reduce_directed_cut,
    reduce_hopfield,
    reduce_max2sat,
    run_bfop_flip,
)
from .errors import (
    DependentVectorsError,
    InvariantViolation,
    ScanBudgetExceeded,
    TrivialArcError,
    ValidationError,
)
from .extraction import check_certificate, extract
from .flip import run_flip
from .hard import build_hard, scan
from .instance import Configuration, DistributionSpec, sample_weights
from .lab import ExperimentPlan, mc_lemma_probability, rows_to_csv, run_experiment


class UsageError(Exception):
    pass


class Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _emit(text, out):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _load(path, reader):
    data = ser.load_json(path)
    try:
        return reader(data)
    except ValidationError as exc:
        if exc.path is None:
            exc.path = str(path)
        raise


def _load_graph(args):
    inst = _load(args.graph, ser.graph_from_dict)
    return inst


def _load_sequence(args, n):
    return _load(args.sequence, lambda d: ser.sequence_from_dict(d, n))


def _initial(args, n):
    if args.init == "ones":
        return Configuration.from_list([1] * n)
    if args.init == "minus":
        return Configuration.from_list([-1] * n)
    rng = np.random.default_rng(args.seed)
    return Configuration.from_list([1 if b else -1 for b in rng.integers(0, 2, size=n)])


def cmd_run(args):
    if bool(args.graph) == bool(args.bfop):
        raise UsageError("run: give exactly one of --graph or --bfop")
    if args.graph:
        inst = _load_graph(args)
        if inst.weights is None:
            if inst.dists is None:
                raise ValidationError("graph has neither weights nor dists", path=args.graph,
                                      field="weights")
            inst = sample_weights(inst, args.seed, exact=args.exact)
        init = _initial(args, inst.n)
        trace = run_flip(inst, init, args.pivot, args.step_cap, args.seed)
        data = ser.trace_to_dict(trace, inst.n)
    else:
        inst = _load(args.bfop, ser.bfop_from_json)
        bits = [1 if s > 0 else 0 for s in _initial(args, inst.n).as_list(inst.n)]
        trace = run_bfop_flip(inst, bits, args.pivot, args.step_cap, args.seed)
        data = {"initial": list(trace.initial), "moves": list(trace.moves),
                "gains": [ser.encode_number(g) for g in trace.gains],
                "terminated": trace.terminated, "final": list(trace.final)}
    _emit(ser.dump_json(data), args.out)
    print(f"steps={len(trace.moves)} terminated={trace.terminated}", file=sys.stderr)
    return 0


def cmd_analyze(args):
    inst = _load_graph(args)
    seq, gamma = _load_sequence(args, inst.n)
    seq.check_nodes(inst)
    arcs = find_arcs(seq)
    cls = classify(seq, inst)
    out = {
        "m": seq.m, "arcs": len(arcs), "rank": rank_of_arcs(seq, arcs, inst),
        "s": cls.s, "w": cls.w, "t": cls.t,
        "good": len(cls.good), "bad": len(cls.bad), "dual_bad": len(cls.dual_bad),
        "long_radius": len(cls.long),
        "trivial": sum(1 for a in arcs if not cls.interior[a]),
        "per_arc": [dict(a.as_dict(), chunk=cls.chunk[a], group=cls.group[a],
                         interior=list(cls.interior[a]), good=a in cls.good,
                         long_radius=a in cls.long) for a in arcs],
    }
    if args.matrix:
        Path(args.matrix).write_text(arc_matrix(seq, arcs, gamma, inst).to_csv())
    _emit(ser.dump_json(out), args.out)
    return 0


def cmd_extract(args):
    inst = _load_graph(args)
    seq, gamma = _load_sequence(args, inst.n)
    cert = extract(seq, gamma, inst, allow_any_length=args.any_length)
    _emit(ser.dump_json(ser.certificate_to_dict(cert)), args.out)
    print(f"case={cert.case} rank={cert.rank} len={len(cert.B)} ratio={cert.ratio:.6g}",
          file=sys.stderr)
    return 0


def cmd_check_cert(args):
    inst = _load_graph(args)
    seq, gamma = _load_sequence(args, inst.n)
    cert = _load(args.cert, ser.certificate_from_dict)
    if check_certificate(seq, gamma, cert, inst):
        print("valid")
        return 0
    print("invalid")
    return 2


def cmd_hard(args):
    inst = build_hard(args.d, args.n1, args.blocks)
    rows = scan(inst, args.scan, args.workers)
    best = max((r["ratio"] for r in rows), default=0)
    buf = io.StringIO()
    cols = ["d", "n1", "blocks", "start", "length", "rank", "ratio", "bound", "max_ratio"]
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    for r in rows:
        writer.writerow([args.d, args.n1, args.blocks, r["start"], r["length"], r["rank"],
                         repr(float(r["ratio"])), r.get("bound", ""), repr(float(best))])
    _emit(buf.getvalue(), args.out)
    print(f"max_ratio={best} ({float(best):.6g})", file=sys.stderr)
    return 0


def cmd_reduce(args):
    if args.kind == "max2sat":
        try:
            text = Path(args.input).read_text()
        except OSError as exc:
            raise ValidationError(f"cannot read {args.input}: {exc.strerror}", path=args.input) from None
        try:
            n, clauses = read_wcnf(text)
            inst = reduce_max2sat(n, clauses)
        except ValidationError as exc:
            exc.path = args.input
            raise
    elif args.kind == "dcut":
        inst = _load(args.input, lambda d: reduce_directed_cut(
            d["n"], [(u, v, ser.decode_number(w)) for u, v, w in d["arcs"]]))
    elif args.kind == "hopfield":
        def read(d):
            g = ser.graph_from_dict(d)
            return reduce_hopfield(g, [ser.decode_number(t) for t in d["thresholds"]])
        inst = _load(args.input, read)
    else:
        inst = _load(args.input, lambda d: reduce_coordination(
            d["n"], [(g["u"], g["v"], g["payoff"]) for g in d["games"]]))
    _emit(ser.dump_json(ser.bfop_to_json(inst)), args.out)
    return 0


def cmd_mc(args):
    try:
        vectors = json.loads(args.vectors)
    except json.JSONDecodeError:
        raise ValidationError("--vectors must be a JSON list of lists", field="vectors") from None
    k = len(vectors[0]) if vectors else 0
    dists = [DistributionSpec(args.lo, args.hi)] * k
    rep = mc_lemma_probability(vectors, dists, args.eps, args.samples, args.seed)
    _emit(ser.dump_json(rep.__dict__), args.out)
    return 0


def _floats(text):
    return tuple(float(x) for x in text.split(",") if x)


def _ints(text):
    return tuple(int(x) for x in text.split(",") if x)


def cmd_bench(args):
    plan = ExperimentPlan(args.family, _ints(args.sizes), _floats(args.phis), args.rule,
                          args.trials, args.seed, args.p, args.degree, args.step_cap)
    _emit(rows_to_csv(run_experiment(plan, args.workers)), args.out)
    return 0


def build_parser():
    p = Parser(prog="smoothflip", description="FLIP local search laboratory")
    sub = p.add_subparsers(dest="command", required=True, parser_class=Parser)

    def common(sp):
        sp.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
        sp.add_argument("--out", help="output file (default: stdout)")
        sp.add_argument("--diag-dir", default=".", help="where to write diagnostic bundles")

    sp = sub.add_parser("run", help="run FLIP on a graph or BFOP file")
    common(sp)
    sp.add_argument("--graph", help="graph JSON")
    sp.add_argument("--bfop", help="BFOP JSON")
    sp.add_argument("--pivot", default="best", choices=["first", "best", "random"])
    sp.add_argument("--init", default="ones", choices=["ones", "minus", "random"],
                    help="initial configuration: all +1, all -1, or random from --seed")
    sp.add_argument("--step-cap", type=int, default=None, help="default 10 n^3")
    sp.add_argument("--exact", action="store_true", help="sample weights as exact rationals")
    sp.set_defaults(func=cmd_run)

    for name, func, text in (("analyze", cmd_analyze, "arcs, ranks and classification of a trace"),
                             ("extract", cmd_extract, "extract a certificate from a sequence"),
                             ("check-cert", cmd_check_cert, "verify a certificate")):
        sp = sub.add_parser(name, help=text)
        common(sp)
        sp.add_argument("--graph", required=True, help="graph JSON")
        sp.add_argument("--sequence", "--trace", dest="sequence", required=True,
                        help="trace or sequence JSON (initial defaults to all -1)")
        if name == "analyze":
            sp.add_argument("--matrix", help="also write the improvement matrix CSV here")
        if name == "extract":
            sp.add_argument("--any-length", action="store_true",
                            help="allow sequences whose length is not 5n")
        if name == "check-cert":
            sp.add_argument("--cert", required=True, help="certificate JSON")
        sp.set_defaults(func=func)

    sp = sub.add_parser("hard", help="layered low-rank sequence and its ratio scan")
    common(sp)
    sp.add_argument("--d", type=int, required=True, help="number of layers")
    sp.add_argument("--n1", type=int, required=True, help="size of the first layer")
    sp.add_argument("--blocks", type=int, required=True, help="number of blocks")
    sp.add_argument("--scan", default="block-aligned", choices=["block-aligned", "full-scan"])
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(func=cmd_hard)

    sp = sub.add_parser("reduce", help="reduce a problem instance to BFOP JSON")
    common(sp)
    sp.add_argument("kind", choices=["max2sat", "dcut", "hopfield", "coordgame"])
    sp.add_argument("--input", required=True,
                    help="wcnf file for max2sat, JSON for the others")
    sp.set_defaults(func=cmd_reduce)

    sp = sub.add_parser("mc", help="Monte Carlo for the anti-concentration lemma")
    common(sp)
    sp.add_argument("--vectors", required=True, help='JSON list of integer vectors, e.g. "[[1,0],[0,1]]"')
    sp.add_argument("--lo", type=float, default=-1.0)
    sp.add_argument("--hi", type=float, default=1.0)
    sp.add_argument("--eps", type=float, default=0.2)
    sp.add_argument("--samples", type=int, default=10 ** 6)
    sp.set_defaults(func=cmd_mc)

    sp = sub.add_parser("bench", help="smoothed-runtime experiment plan to CSV")
    common(sp)
    sp.add_argument("--family", default="complete",
                    choices=["complete", "erdos-renyi", "bounded-degree"])
    sp.add_argument("--sizes", default="8,16", help="comma-separated n values")
    sp.add_argument("--phis", default="0.5,2", help="comma-separated density bounds")
    sp.add_argument("--rule", default="best", choices=["first", "best", "random"])
    sp.add_argument("--trials", type=int, default=10)
    sp.add_argument("--p", type=float, default=0.5, help="edge probability for erdos-renyi")
    sp.add_argument("--degree", type=int, default=3, help="degree bound for bounded-degree")
    sp.add_argument("--step-cap", type=int, default=None)
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(func=cmd_bench)
    return p


def _write_bundle(args, argv, exc):
    bundle = {
        "argv": list(argv),
        "error": str(exc),
        "context": {k: repr(v) for k, v in getattr(exc, "context", {}).items()},
        "traceback": traceback.format_exc(),
        "inputs": {},
    }
    for key in ("graph", "sequence", "cert", "bfop", "input"):
        path = getattr(args, key, None)
        if path:
            try:
                bundle["inputs"][key] = Path(path).read_text()
            except OSError:
                bundle["inputs"][key] = None
    target = Path(getattr(args, "diag_dir", ".") or ".") / "smoothflip-diagnostic.json"
    target.write_text(json.dumps(bundle, indent=2) + "\n")
    return target


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except DependentVectorsError as exc:
        combo = ", ".join(str(c) for c in exc.combination)
        print(f"error: {exc}; vanishing combination [{combo}]", file=sys.stderr)
        return 2
    except (ValidationError, ScanBudgetExceeded, TrivialArcError, KeyError) as exc:
        where = ""
        if getattr(exc, "path", None):
            where += f"{exc.path}: "
        if getattr(exc, "field", None):
            where += f"field {exc.field}: "
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {where}{msg}", file=sys.stderr)
        return 2
    except InvariantViolation as exc:
        target = _write_bundle(args, argv, exc)
        print(f"internal invariant failed: {exc} (diagnostics in {target})", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
