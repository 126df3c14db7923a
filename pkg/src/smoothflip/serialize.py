"""JSON readers and writers; exact rationals travel as "p/q" strings."""

import json
from fractions import Fraction

from .arcs import Arc, MoveSequence
from .errors import ValidationError
from .extraction import ExtractionCertificate
from .flip import FlipTrace, final_of
from .instance import Configuration, DistributionSpec, WeightedInstance


def encode_number(x):
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return x


def decode_number(x, where=None):
    if isinstance(x, bool):
        raise ValidationError(f"expected a number, got {x!r}", field=where)
    if isinstance(x, (int, float)):
        return x
    if isinstance(x, str):
        try:
            return Fraction(x)
        except (ValueError, ZeroDivisionError):
            pass
    raise ValidationError(f"expected a number, got {x!r}", field=where)


def load_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}", path=str(path)) from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})",
                              path=str(path)) from None


def dump_json(data, path=None):
    text = json.dumps(data, indent=2, sort_keys=False) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


def _get(data, key, where):
    if not isinstance(data, dict):
        raise ValidationError(f"{where}: expected an object", field=where)
    if key not in data:
        raise ValidationError(f"{where}: missing field {key!r}", field=key)
    return data[key]


# ---- graphs -----------------------------------------------------------------

def graph_to_dict(inst):
    out = {"n": inst.n, "edges": [list(e) for e in inst.edges]}
    if inst.weights is not None:
        out["weights"] = [encode_number(w) for w in inst.weights]
    if inst.dists is not None:
        out["dists"] = [{"lo": d.lo, "hi": d.hi} for d in inst.dists]
    return out


def graph_from_dict(data):
    n = _get(data, "n", "graph")
    edges = _get(data, "edges", "graph")
    if not isinstance(edges, list):
        raise ValidationError("edges must be a list", field="edges")
    weights = data.get("weights")
    if weights is not None:
        weights = tuple(decode_number(w, f"weights[{i}]") for i, w in enumerate(weights))
    dists = data.get("dists")
    if dists is not None:
        parsed = []
        for i, d in enumerate(dists):
            if not isinstance(d, dict) or "lo" not in d or "hi" not in d:
                raise ValidationError(f"dists[{i}] needs lo and hi", field=f"dists[{i}]")
            parsed.append(DistributionSpec(d["lo"], d["hi"]))
        dists = tuple(parsed)
    return WeightedInstance(n, tuple(tuple(e) if isinstance(e, list) else e for e in edges),
                            weights, dists)


# ---- traces and sequences ------------------------------------------------------

def trace_to_dict(trace, n=None):
    init = trace.initial
    if isinstance(init, Configuration):
        n = n if n is not None else max(init.domain, default=0)
        initial = init.as_list(n)
    else:
        initial = list(init)
    return {"initial": initial, "moves": list(trace.moves),
            "gains": [encode_number(g) for g in trace.gains], "terminated": trace.terminated}


def trace_from_dict(data):
    initial = _get(data, "initial", "trace")
    moves = _get(data, "moves", "trace")
    gains = [decode_number(g, f"gains[{i}]") for i, g in enumerate(data.get("gains", []))]
    if gains and len(gains) != len(moves):
        raise ValidationError("gains and moves differ in length", field="gains")
    init = Configuration.from_list(initial)
    for i, v in enumerate(moves):
        if not isinstance(v, int) or isinstance(v, bool) or not 1 <= v <= len(initial):
            raise ValidationError(f"moves[{i}] = {v!r} is not a node id", field=f"moves[{i}]")
    return FlipTrace(init, tuple(moves), tuple(gains), final_of(init, moves),
                     bool(data.get("terminated", False)))


def sequence_from_dict(data, n=None):
    """A trace or {"moves": [...], "initial": [...]?}; default initial configuration is all -1."""
    moves = _get(data, "moves", "sequence")
    if not isinstance(moves, list) or any(not isinstance(v, int) or isinstance(v, bool) for v in moves):
        raise ValidationError("moves must be a list of node ids", field="moves")
    seq = MoveSequence(tuple(moves))
    if "initial" in data:
        gamma = Configuration.from_list(data["initial"])
    else:
        nodes = range(1, n + 1) if n is not None else seq.active
        gamma = Configuration.uniform(nodes, -1)
    return seq, gamma


# ---- certificates ------------------------------------------------------------

def certificate_to_dict(cert):
    return {
        "case": cert.case,
        "B": list(cert.B),
        "tau": {str(v): s for v, s in sorted(cert.tau.items())},
        "Q": [dict(q.as_dict(), source={"left": src.left, "right": src.right})
              for q, src in zip(cert.Q, cert.mapping)],
        "rank": cert.rank,
        "ratio": cert.ratio,
    }


def certificate_from_dict(data):
    try:
        tau = Configuration({int(v): s for v, s in _get(data, "tau", "certificate").items()})
        Q, mapping = [], []
        for i, q in enumerate(_get(data, "Q", "certificate")):
            node = int(q["node"])
            Q.append(Arc(int(q["left"]), int(q["right"]), node))
            mapping.append(Arc(int(q["source"]["left"]), int(q["source"]["right"]), node))
        return ExtractionCertificate(str(data["case"]), tuple(int(k) for k in data["B"]), tau,
                                     tuple(Q), tuple(mapping), int(data["rank"]), float(data["ratio"]))
    except (KeyError, TypeError, AttributeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(f"malformed certificate: {exc!r}", field="certificate") from None


# ---- BFOP ---------------------------------------------------------------------

def bfop_to_json(inst):
    from .csp import bfop_to_dict
    data = bfop_to_dict(inst)
    for f in data["binary"] + data["unary"]:
        f["weight"] = encode_number(f["weight"])
    return data


def bfop_from_json(data):
    from .csp import bfop_from_dict
    if not isinstance(data, dict):
        raise ValidationError("BFOP document must be an object", field="bfop")
    data = dict(data)
    for key in ("binary", "unary"):
        items = []
        for i, f in enumerate(data.get(key, [])):
            if not isinstance(f, dict):
                raise ValidationError(f"{key}[{i}] must be an object", field=f"{key}[{i}]")
            f = dict(f)
            f["weight"] = decode_number(f.get("weight", 1), f"{key}[{i}].weight")
            items.append(f)
        data[key] = items
    return bfop_from_dict(data)
