"""Command-line front end: synthesis, evaluation, verification and CFI/WL experiments.

Exit codes: 0 success, 1 usage, 2 parse error, 3 cap exceeded, 4 verification failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import random
import sys
import tempfile
from fractions import Fraction
from itertools import permutations
from typing import Callable, Sequence

from . import __version__
from .cfi import (
    SimpleGraph,
    cfi,
    cfi_pairs,
    counting_width_experiment,
    k_wl_equivalent,
    named_base,
    wl_equivalent,
)
from .circuit import Circuit, CircuitFormatError, deserialize, evaluate, serialize
from .graphs import BipartitePattern, LabelledPattern, WeightedHost, format_rational, parse_rational
from .immanant import IntegerPartition, brute_force_immanant, cofactor_determinant, synth_immanant, synth_symmetric_determinant
from .oracle import brute_hom, brute_sub
from .partitions import CapExceeded
from .synth import SynthReport, synth_biclique, synth_hom, synth_sub_cover, synth_sub_moebius
from .treedec import from_pace

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_CAP, EXIT_VERIFY = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


class ParseError(Exception):
    pass


class VerificationFailure(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse exits with 2 by default; usage errors are 1 here
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# --------------------------------------------------------------------------- formats


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc


def _json(path: str):
    try:
        return json.loads(_read(path))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc}") from exc


def digest(path: str) -> str:
    return hashlib.sha256(_read(path).encode()).hexdigest()


def pattern_from_json(obj) -> LabelledPattern:
    try:
        left, right = int(obj["left"]), int(obj["right"])
        edges = []
        for e in obj.get("edges", []):
            if len(e) == 2:
                edges.append((int(e[0]), int(e[1]), 1))
            elif len(e) == 3:
                edges.append((int(e[0]), int(e[1]), int(e[2])))
            else:
                raise ValueError(f"edge {e!r} needs 2 or 3 entries")
        labels = obj.get("labels", {}) or {}
        base = BipartitePattern(left, right, tuple(edges))
        return LabelledPattern(base, tuple(labels.get("left", [])), tuple(labels.get("right", [])))
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad pattern: {exc}") from exc


def pattern_to_json(lp: LabelledPattern | BipartitePattern) -> dict:
    if isinstance(lp, BipartitePattern):
        lp = LabelledPattern(lp)
    return {
        "left": lp.base.left_size,
        "right": lp.base.right_size,
        "edges": [list(e) for e in lp.base.edges],
        "labels": {"left": list(lp.left_labels), "right": list(lp.right_labels)},
    }


def host_from_json(obj) -> WeightedHost:
    try:
        if "entries" in obj:
            host = WeightedHost.from_rows(obj["entries"])
            if "n" in obj and (int(obj["n"]), int(obj["m"])) != (host.n, host.m):
                raise ValueError("declared n, m differ from the entry matrix")
            return host
        n, m = int(obj["n"]), int(obj["m"])
        rows = [[Fraction(0)] * m for _ in range(n)]
        for i, j, x in obj.get("triples", []):
            if not (0 <= int(i) < n and 0 <= int(j) < m):
                raise ValueError(f"triple ({i}, {j}) outside {n}x{m}")
            rows[int(i)][int(j)] = parse_rational(x)
        return WeightedHost.from_rows(rows)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad host: {exc}") from exc


def host_to_json(host: WeightedHost) -> dict:
    return {"n": host.n, "m": host.m, "entries": [[format_rational(x) for x in row] for row in host.entries]}


def graph_to_json(g: SimpleGraph, provenance: dict | None = None) -> dict:
    idx = {v: i for i, v in enumerate(g.vertices)}
    out = {
        "vertices": len(g.vertices),
        "edges": sorted([sorted((idx[u], idx[v])) for u, v in g.edges]),
    }
    if g.sides is not None:
        out["sides"] = list(g.sides)
    if g.weights is not None:
        out["weights"] = [[idx[u], idx[v], format_rational(w)] for (u, v), w in g.weights]
    if provenance is not None:
        out["provenance"] = [repr(provenance[v]) for v in g.vertices]
    return out


def graph_from_json(obj) -> SimpleGraph:
    try:
        n = int(obj["vertices"])
        edges = [(int(u), int(v)) for u, v in obj.get("edges", [])]
        weights = None
        if "weights" in obj:
            weights = [(tuple(sorted((int(u), int(v)))), parse_rational(w)) for u, v, w in obj["weights"]]
            weights = [((u, v) if repr(u) <= repr(v) else (v, u), w) for (u, v), w in weights]
        return SimpleGraph.from_edges(range(n), edges, sides=obj.get("sides"), weights=weights)
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad graph: {exc}") from exc


def write_atomic(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        write_atomic(path, text)


def _envelope(args, inputs: Sequence[str], body: dict) -> dict:
    return {
        "tool": "symcirc",
        "version": __version__,
        "command": args.command,
        "seed": getattr(args, "seed", None),
        "inputs": {p: digest(p) for p in inputs if p},
        **body,
    }


# --------------------------------------------------------------------------- commands


def _lambda(text: str) -> IntegerPartition:
    try:
        return IntegerPartition.parse(text)
    except ValueError as exc:
        raise ParseError(f"bad partition {text!r}: {exc}") from exc


def cmd_synth(args) -> int:
    inputs: list[str] = []
    kind = args.kind
    if kind in ("hom", "sub-moebius", "sub-cover"):
        if not args.pattern or args.n is None or args.m is None:
            raise UsageError(f"synth {kind} needs --pattern, --n and --m")
        lp = pattern_from_json(_json(args.pattern))
        inputs.append(args.pattern)
        pattern = lp.base
        if kind == "hom":
            td = None
            if args.td:
                inputs.append(args.td)
                try:
                    td = from_pace(_read(args.td), pattern)
                except ValueError as exc:
                    raise ParseError(f"{args.td}: {exc}") from exc
            elif pattern.num_vertices > args.cap_treewidth:
                raise CapExceeded(
                    f"pattern has {pattern.num_vertices} vertices; exact treewidth is capped at "
                    f"{args.cap_treewidth}, supply --td"
                )
            report = synth_hom(pattern, td, args.n, args.m)
        elif kind == "sub-moebius":
            report = synth_sub_moebius(pattern, args.n, args.m)
        else:
            report = synth_sub_cover(pattern, args.n, args.m, cap=args.cap_cover)
    elif kind == "biclique":
        if args.k is None or args.n is None:
            raise UsageError("synth biclique needs --k and --n")
        report = synth_biclique(args.biclique_kind, args.k, args.n)
    elif kind == "immanant":
        if not args.lam:
            raise UsageError("synth immanant needs --lambda")
        report = synth_immanant(_lambda(args.lam))
    elif kind == "determinant":
        if args.n is None:
            raise UsageError("synth determinant needs --n")
        circuit = synth_symmetric_determinant(args.n)
        from .circuit import size

        report = SynthReport(circuit, size(circuit), None, 0, True, {"n": args.n})
    else:
        raise UsageError(f"unknown synth kind {kind!r}")
    _emit(args.out, serialize(report.circuit))
    rep = _envelope(args, inputs, {"kind": kind, "report": json.loads(report.to_json())})
    text = json.dumps(rep, sort_keys=True, indent=2) + "\n"
    if args.report:
        write_atomic(args.report, text)
    elif args.out and args.out != "-":
        write_atomic(args.out + ".report.json", text)
    else:
        sys.stderr.write(text)
    return EXIT_OK


def _load_circuit(path: str) -> Circuit:
    try:
        return deserialize(_read(path))
    except CircuitFormatError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def cmd_eval(args) -> int:
    circuit = _load_circuit(args.circuit)
    host = host_from_json(_json(args.host))
    if (host.n, host.m) != (circuit.n, circuit.m):
        raise ParseError(f"host is {host.n}x{host.m}, circuit expects {circuit.n}x{circuit.m}")
    print(format_rational(evaluate(circuit, host)))
    return EXIT_OK


def _oracle(args, circuit: Circuit) -> tuple[Callable[[WeightedHost], Fraction], list[str]]:
    kind = args.oracle
    if kind in ("hom", "sub"):
        if not args.pattern:
            raise UsageError(f"--oracle {kind} needs --pattern")
        pattern = pattern_from_json(_json(args.pattern)).base
        fn = brute_hom if kind == "hom" else brute_sub
        return (lambda h: fn(pattern, h)), [args.pattern]
    if kind == "det":
        return (lambda h: cofactor_determinant(h.entries)), []
    if kind == "perm":
        return (lambda h: brute_force_immanant((circuit.n,), h.entries)), []
    if kind == "imm":
        if not args.lam:
            raise UsageError("--oracle imm needs --lambda")
        lam = _lambda(args.lam)
        return (lambda h: brute_force_immanant(lam, h.entries)), []
    raise UsageError(f"unknown oracle {kind!r}")


def cmd_verify(args) -> int:
    if args.trials < 1:
        raise UsageError("--trials must be positive")
    circuit = _load_circuit(args.circuit)
    oracle, inputs = _oracle(args, circuit)
    rng = random.Random(args.seed)
    failure = None
    for t in range(args.trials):
        host = WeightedHost.random(rng, circuit.n, circuit.m)
        got, want = evaluate(circuit, host), oracle(host)
        if got != want:
            failure = {"trial": t, "host": host_to_json(host), "circuit": format_rational(got), "oracle": format_rational(want)}
            break
    verdict = "PASS" if failure is None else "FAIL"
    rep = _envelope(args, [args.circuit] + inputs, {"verdict": verdict, "trials": args.trials, "oracle": args.oracle})
    if failure:
        rep["counterexample"] = failure
    if failure:
        print(f"FAIL counterexample at trial {failure['trial']}: circuit {failure['circuit']}, oracle {failure['oracle']}")
    else:
        print(verdict)
    text = json.dumps(rep, sort_keys=True, indent=2) + "\n"
    if args.report:
        write_atomic(args.report, text)
    elif failure:
        sys.stderr.write(text)
    if failure:
        raise VerificationFailure("circuit disagrees with the oracle")
    return EXIT_OK


def _twist(text: str, size: int) -> tuple[int, ...]:
    if len(text) != size or any(c not in "01" for c in text):
        raise ParseError(f"twist must be a 0/1 string of length {size}")
    return tuple(int(c) for c in text)


def cmd_cfi(args) -> int:
    try:
        base = named_base(args.base)
    except ValueError as exc:
        raise ParseError(str(exc)) from exc
    twist = _twist(args.twist, base.order) if args.twist else (0,) * base.order
    inst = cfi(base, twist)
    obj = graph_to_json(inst.graph, inst.rho)
    obj["base"] = args.base
    obj["twist"] = "".join(map(str, twist))
    _emit(args.out, json.dumps(obj, sort_keys=True) + "\n")
    return EXIT_OK


def cmd_wl(args) -> int:
    g = graph_from_json(_json(args.g))
    h = graph_from_json(_json(args.h))
    if args.wl_dim is not None:
        verdict = wl_equivalent(g, h, args.wl_dim)
    else:
        verdict = k_wl_equivalent(g, h, args.k)
    print("EQUIVALENT" if verdict.equivalent else "DISTINGUISHED")
    if args.report:
        rep = _envelope(args, [args.g, args.h], {"ck": args.k, **verdict.to_json()})
        write_atomic(args.report, json.dumps(rep, sort_keys=True, indent=2) + "\n")
    return EXIT_OK


AUTO_BASES = {2: ["c4", "c6", "k2,3"], 3: ["k3,3", "grid3x3"], 4: ["k4,4"]}


def _permanent(host: WeightedHost) -> Fraction:
    n = host.n
    total = Fraction(0)
    for p in permutations(range(n)):
        prod = Fraction(1)
        for i in range(n):
            prod *= host.entries[i][p[i]]
            if not prod:
                break
        total += prod
    return total


def _width_evaluator(args) -> tuple[Callable[[SimpleGraph], object], list[str]]:
    poly = args.poly
    if poly == "const":
        return (lambda g: Fraction(1)), []
    if poly == "perm":
        def perm(g: SimpleGraph):
            host = g.biadjacency()
            return _permanent(host) if host.n == host.m else "n/a"

        return perm, []
    if poly == "hom":
        if not args.pattern:
            raise UsageError("--poly hom needs --pattern")
        pattern = pattern_from_json(_json(args.pattern)).base
        cache: dict = {}

        def hom(g: SimpleGraph):
            host = g.biadjacency()
            key = (host.n, host.m)
            if key not in cache:
                cache[key] = synth_hom(pattern, None, host.n, host.m).circuit
            return evaluate(cache[key], host)

        return hom, [args.pattern]
    raise UsageError(f"unknown polynomial {poly!r}")


def cmd_widthlab(args) -> int:
    evaluate_graph, inputs = _width_evaluator(args)
    names = AUTO_BASES.get(args.k, []) if args.bases == "auto" else args.bases.split(";")
    try:
        bases = [named_base(b) for b in names]
    except ValueError as exc:
        raise ParseError(str(exc)) from exc
    rng = random.Random(args.seed)
    pairs = cfi_pairs(bases, args.limit, rng)
    rows = counting_width_experiment(evaluate_graph, args.k, pairs, check_equivalence=not args.skip_wl)
    head = _envelope(args, inputs, {"poly": args.poly, "k": args.k, "bases": names})
    lines = [json.dumps({"header": head}, sort_keys=True)]
    for row in rows:
        row["base_name"] = names[row["base"]]
        row["twist_g"] = "".join(map(str, row["twist_g"]))
        row["twist_h"] = "".join(map(str, row["twist_h"]))
        lines.append(json.dumps(row, sort_keys=True))
    _emit(args.out, "\n".join(lines) + "\n")
    return EXIT_OK


# --------------------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="symcirc", description="Symmetric arithmetic circuits for matrix-symmetric polynomials.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("synth", help="synthesize a circuit")
    s.add_argument("kind", choices=["hom", "sub-moebius", "sub-cover", "biclique", "immanant", "determinant"])
    s.add_argument("--pattern")
    s.add_argument("--td", help="PACE .td decomposition of the pattern")
    s.add_argument("--n", type=int)
    s.add_argument("--m", type=int)
    s.add_argument("--k", type=int)
    s.add_argument("--biclique-kind", choices=["k", "n-k"], default="k")
    s.add_argument("--lambda", dest="lam")
    s.add_argument("--out", help="circuit file (default: standard output)")
    s.add_argument("--report", help="JSON report file (default: <out>.report.json or standard error)")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--cap-treewidth", type=int, default=12)
    s.add_argument("--cap-cover", type=int, default=4)
    s.set_defaults(func=cmd_synth)

    e = sub.add_parser("eval", help="evaluate a circuit on a host")
    e.add_argument("circuit")
    e.add_argument("host")
    e.set_defaults(func=cmd_eval)

    v = sub.add_parser("verify", help="compare a circuit with a brute-force oracle on random hosts")
    v.add_argument("circuit")
    v.add_argument("--oracle", choices=["hom", "sub", "det", "perm", "imm"], default="hom")
    v.add_argument("--pattern")
    v.add_argument("--lambda", dest="lam")
    v.add_argument("--trials", type=int, default=20)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--report")
    v.set_defaults(func=cmd_verify)

    c = sub.add_parser("cfi", help="write a CFI graph")
    c.add_argument("--base", required=True, help="c<n>, p<n>, k<n>, k<a>,<b> or grid<r>x<c>")
    c.add_argument("--twist", help="0/1 string, one entry per base vertex")
    c.add_argument("--out")
    c.set_defaults(func=cmd_cfi)

    w = sub.add_parser("wl", help="C^k-equivalence test (runs (k-1)-dimensional WL)")
    w.add_argument("g")
    w.add_argument("h")
    w.add_argument("--k", type=int, default=2)
    w.add_argument("--wl-dim", type=int, help="run this WL dimension directly")
    w.add_argument("--report")
    w.set_defaults(func=cmd_wl)

    x = sub.add_parser("widthlab", help="counting-width experiment over CFI pairs (JSONL)")
    x.add_argument("--poly", choices=["perm", "hom", "const"], required=True)
    x.add_argument("--pattern")
    x.add_argument("--k", type=int, default=2)
    x.add_argument("--bases", default="auto", help="'auto' or names separated by ';'")
    x.add_argument("--limit", type=int, default=20, help="pairs per base")
    x.add_argument("--seed", type=int, default=0)
    x.add_argument("--skip-wl", action="store_true")
    x.add_argument("--out")
    x.set_defaults(func=cmd_widthlab)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    if not getattr(args, "command", None):
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, CircuitFormatError) as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except CapExceeded as exc:
        print(f"cap exceeded: {exc}", file=sys.stderr)
        return EXIT_CAP
    except VerificationFailure as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except ValueError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
