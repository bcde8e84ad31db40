"""Command-line entry point.

Exit codes: 0 for SAT / valid / done, 1 for UNSAT / invalid, 2 for errors.
Results go to stdout; the run report goes to stderr as ``c`` lines. Wall
times appear only with ``--timing`` so that fixed-seed runs are
byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import re
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import csp23, induced2, kcsp_enum, min2sat, pac, reductions, twocsp
from .errors import AlgoMismatch, CcspError, GadgetNotFound
from .instance import (Instance, all_positive_ksat, parse_instance, random_complete_instance,
                       serialize_instance, to_label_string, validate_complete)
from .oracle import enumerate_bruteforce, first_solution_bruteforce, min_unsat_bruteforce

EXIT_OK, EXIT_NO, EXIT_ERR = 0, 1, 2
ALGOS = ("auto", "bruteforce", "kcsp", "3sat", "2csp", "induced2", "csp23", "pac43", "pac55")
ENUMERATORS = ("bruteforce", "kcsp", "3sat", "2csp")
_PAC_LINE = re.compile(r"^c\s+pac\s+(\d+)\s+(\d+)\s+(complete|over)\s*$", re.M)


class UsageError(Exception):
    pass


@dataclass
class RunReport:
    algorithm: str
    digest: str
    result: str
    seed: int | None = None
    counters: dict = field(default_factory=dict)
    seconds: float | None = None

    def lines(self, timing: bool = False) -> list[str]:
        out = [f"c algo {self.algorithm}", f"c digest {self.digest}", f"c result {self.result}"]
        if self.seed is not None:
            out.append(f"c seed {self.seed}")
        out += [f"c {k} {v}" for k, v in sorted(self.counters.items())]
        if timing and self.seconds is not None:
            out.append(f"c seconds {self.seconds:.4f}")
        return out


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text()


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _pac_meta(args, text: str):
    if args.pac:
        r, l, mode = args.pac
        return int(r), int(l), mode
    m = _PAC_LINE.search(text)
    if m:
        return int(m.group(1)), int(m.group(2)), m.group(3)
    return None


def _ints(spec: str) -> list[int]:
    return [int(x) for x in spec.split(",") if x.strip()]


# -- check ---------------------------------------------------------------------

def cmd_check(args) -> int:
    text = _read(args.file)
    inst = parse_instance(text)
    meta = _pac_meta(args, text)
    if meta:
        r, l, mode = meta
        p = pac.csp_to_pac(inst, l)
        if p.r != r:
            raise UsageError(f"--pac says r={r} but the file has r={inst.r}")
        rep = pac.validate_pac(p, mode)
    else:
        rep = validate_complete(inst)
    print("\n".join(rep.lines()))
    return EXIT_OK if rep.ok else EXIT_NO


# -- solve ---------------------------------------------------------------------

def _auto(inst: Instance, meta, enumerate_: bool) -> str:
    if meta:
        r, l, mode = meta
        if r == 4:
            return "pac43"
        if r == 5 and l == 5:
            return "pac55"
    if inst.k == 2 and inst.r == 3:
        return "csp23"
    if inst.r == 2:
        if inst.k == 2:
            return "2csp"
        if not enumerate_ and induced2.is_induced2(inst):
            return "induced2"
        return "kcsp"
    return "bruteforce"


def _solve(inst: Instance, algo: str, enumerate_: bool, meta, cutoff):
    """(sat, solutions or witness, counters)."""
    if enumerate_ and algo not in ENUMERATORS:
        raise AlgoMismatch(f"--enumerate is not supported by {algo}")
    counters = {}
    if algo == "bruteforce":
        if enumerate_:
            sols = enumerate_bruteforce(inst)
            return bool(len(sols)), sols, counters
        w = first_solution_bruteforce(inst)
        return w is not None, w, counters
    if algo in ("kcsp", "3sat", "2csp"):
        if algo == "2csp":
            if inst.k != 2 or inst.r != 2:
                raise AlgoMismatch("2csp needs a Boolean instance with k=2")
            stats = twocsp.EnumStats()
            sols = twocsp.enumerate_complete_2csp(inst, stats)
            counters["pruning_calls"] = stats.pruning_calls
        else:
            stats = kcsp_enum.KcspStats()
            if algo == "3sat":
                sols = kcsp_enum.enumerate_3sat(inst, small_cutoff=cutoff, stats=stats)
            else:
                sols = kcsp_enum.enumerate_kcsp(inst, small_cutoff=cutoff, stats=stats)
            counters.update(nodes=stats.nodes, max_depth=stats.max_depth,
                            residual_calls=stats.residual_calls)
        counters["solutions"] = len(sols)
        if enumerate_:
            return bool(len(sols)), sols, counters
        first = sols.tuples()[0] if len(sols) else None
        return first is not None, first, counters
    if algo == "induced2":
        sat, w = induced2.decide_induced2(inst)
        return sat, w, counters
    if algo == "csp23":
        stats = csp23.EngineStats()
        sat, w = csp23.decide_23csp(inst, small_cutoff=cutoff, stats=stats)
        counters.update(nodes=stats.nodes, max_depth=stats.max_depth)
        return sat, w, counters
    if algo in ("pac43", "pac55"):
        l = meta[1] if meta else (3 if algo == "pac43" else 5)
        p = pac.csp_to_pac(inst, l)
        stats = pac.PacStats()
        fn = pac.decide_pac43 if algo == "pac43" else pac.decide_pac55
        sat, w = fn(p, small_cutoff=cutoff, stats=stats)
        counters.update(nodes=stats.outer.nodes + sum(s.nodes for s in stats.inner))
        return sat, w, counters
    raise UsageError(f"unknown algorithm {algo}")


def cmd_solve(args) -> int:
    text = _read(args.file)
    inst = parse_instance(text)
    meta = _pac_meta(args, text)
    algo = _auto(inst, meta, args.enumerate) if args.algo == "auto" else args.algo
    start = time.perf_counter()
    sat, payload, counters = _solve(inst, algo, args.enumerate, meta, args.small_cutoff)
    seconds = time.perf_counter() - start
    if args.enumerate:
        for s in payload:
            print(s)
        result = f"{len(payload)} solutions"
    else:
        print(f"SAT {to_label_string(payload)}" if sat else "UNSAT")
        result = "SAT" if sat else "UNSAT"
    report = RunReport(algo, inst.digest(), result, args.seed, counters, seconds)
    print("\n".join(report.lines(args.timing)), file=sys.stderr)
    return EXIT_OK if sat else EXIT_NO


# -- gen -----------------------------------------------------------------------

def _rng(seed: int):
    return np.random.default_rng(np.random.SeedSequence(seed))


def cmd_gen(args) -> int:
    fam = args.family
    rng = _rng(args.seed)
    comments = [f"family {fam} seed {args.seed}"]
    need = {"random": ("n", "k"), "allpos": ("n", "k"), "symmetric": ("n", "k", "S"),
            "pac": ("n",), "cnf": ("n", "k", "m"), "densify": ("input",),
            "product": ("input", "t"), "gadget": ("kind", "t"), "from-cnf": ("input",)}
    for name in need[fam]:
        if getattr(args, name) is None:
            raise UsageError(f"gen {fam} needs --{name}")

    if fam == "random":
        planted = rng.integers(0, args.r, args.n) if args.planted else None
        inst = random_complete_instance(args.n, args.k, args.r, rng, args.min_tuples,
                                        args.max_tuples, planted)
    elif fam == "allpos":
        inst = all_positive_ksat(args.n, args.k)
    elif fam == "symmetric":
        spec = induced2.SymmetricSpec(args.k, _ints(args.S))
        signs = None
        if args.signs == "random":
            signs = {key: tuple(int(s) for s in rng.integers(0, 2, args.k))
                     for key in itertools.combinations(range(args.n), args.k)}
        inst = induced2.build_symmetric_instance(args.n, spec, signs)
    elif fam == "pac":
        r, l = args.r_pac, args.l
        p = pac.random_pac(args.n, r, l, rng, args.mode, coherent=args.coherent)
        inst = pac.pac_to_csp(p)
        comments.append(f"pac {r} {l} {args.mode}")
    elif fam == "cnf":
        cnf = reductions.random_cnf(args.n, args.k, args.m, rng)
        _emit(cnf.to_dimacs(comments), args.output)
        return EXIT_OK
    elif fam == "densify":
        cnf = reductions.parse_dimacs(_read(args.input))
        _emit(reductions.densify(cnf, args.eps).to_dimacs(comments), args.output)
        return EXIT_OK
    elif fam == "product":
        cnf = reductions.parse_dimacs(_read(args.input))
        res = reductions.product_reduction(cnf, args.t, seed=args.seed)
        inst = res.instance
        comments.append(f"product t {args.t} p {res.p:g} real {len(res.real_keys)}")
    elif fam == "gadget":
        sigma = tuple(_ints(args.sigma)) if args.sigma else (0, 0, 0)
        try:
            g = reductions.gadget_search(args.kind, args.t, args.seed, args.max_tries, sigma)
            status = EXIT_OK
        except GadgetNotFound as exc:
            g = exc.last
            status = EXIT_NO
            print(f"c {exc}", file=sys.stderr)
        props = " ".join(f"P{k}={'yes' if v else 'no'}" for k, v in sorted(g.properties.items()))
        comments.append(f"gadget {g.kind} t {g.t} tries {g.tries} verified "
                        f"{'yes' if g.verified else 'no'} {props}")
        _emit(serialize_instance(g.instance, comments), args.output)
        return status
    elif fam == "from-cnf":
        cnf = reductions.parse_dimacs(_read(args.input))
        inst = reductions.cnf_to_complete3sat(cnf)
    else:  # pragma: no cover - argparse restricts choices
        raise UsageError(f"unknown family {fam}")
    _emit(serialize_instance(inst, comments), args.output)
    return EXIT_OK


# -- min2sat -------------------------------------------------------------------

def cmd_min2sat(args) -> int:
    inst = parse_instance(_read(args.file))
    start = time.perf_counter()
    outcome, sdp = min2sat.min2sat_approx(inst, args.seed, args.sdp_iters, args.trials)
    seconds = time.perf_counter() - start
    print(f"cost {outcome.cost}")
    print(f"assignment_cost {outcome.assignment_cost}")
    print(f"assignment {to_label_string(outcome.assignment) if outcome.assignment else '-'}")
    print("deleted " + " ".join(str(c + 1) for c in sorted(outcome.deleted_clauses)))
    print(f"sdp {sdp.objective:.6f}")
    if args.exact:
        if inst.n > 16:
            raise UsageError("--exact supports n <= 16")
        opt = min_unsat_bruteforce(inst)[0]
        print(f"opt {opt}")
        print(f"ratio {outcome.cost / opt:.4f}" if opt else
              f"ratio {'1.0000' if outcome.cost == 0 else 'inf'}")
    counters = {"trials": args.trials, "sdp_iterations": sdp.iterations,
                "sdp_violation": f"{sdp.max_violation:.1e}", "consistent": outcome.consistent}
    if outcome.warning:
        counters["warning"] = outcome.warning.replace(" ", "_")
    report = RunReport("min2sat", inst.digest(), f"cost {outcome.cost}", args.seed, counters,
                       seconds)
    print("\n".join(report.lines(args.timing)), file=sys.stderr)
    return EXIT_OK


# -- bench ---------------------------------------------------------------------

BENCH_FAMILIES = ("allpos3", "kcsp3", "kcsp4", "2csp", "induced2", "csp23", "pac43",
                  "pac55", "min2sat")


def _bench_task(task):
    family, n, rep, seed, cutoff = task
    rng = np.random.default_rng(seed)
    row = {"family": family, "n": n, "rep": rep, "seed": seed}
    start = time.perf_counter()
    if family in ("allpos3", "kcsp3", "kcsp4", "2csp"):
        k = {"allpos3": 3, "kcsp3": 3, "kcsp4": 4, "2csp": 2}[family]
        if family == "allpos3":
            inst = all_positive_ksat(n, 3)
        else:
            planted = rng.integers(0, 2, n) if rep % 2 else None
            inst = random_complete_instance(n, k, 2, rng, 1, 2, planted)
        if k == 2:
            stats = twocsp.EnumStats()
            sols = twocsp.enumerate_complete_2csp(inst, stats)
            row.update(algo="2csp", nodes=stats.pruning_calls)
        else:
            stats = kcsp_enum.KcspStats()
            sols = kcsp_enum.enumerate_kcsp(inst, small_cutoff=cutoff, stats=stats)
            row.update(algo="kcsp", nodes=stats.nodes)
        row["result"] = len(sols)
    elif family == "induced2":
        inst = induced2.random_induced2_instance(n, 3, rng,
                                                 rng.integers(0, 2, n) if rep % 2 else None)
        sat, _ = induced2.decide_induced2(inst)
        row.update(algo="induced2", nodes=2, result=int(sat))
    elif family == "csp23":
        planted = rng.integers(0, 3, n) if rep % 2 else None
        inst = random_complete_instance(n, 2, 3, rng, 1, 3, planted)
        stats = csp23.EngineStats()
        sat, _ = csp23.decide_23csp(inst, small_cutoff=cutoff, stats=stats)
        row.update(algo="csp23", nodes=stats.nodes, result=int(sat))
    elif family in ("pac43", "pac55"):
        stats = pac.PacStats()
        if family == "pac43":
            p = pac.random_pac(n, 4, 3, rng, pac.OVER, coherent=1.0)
            sat, _ = pac.decide_pac43(p, small_cutoff=cutoff, stats=stats)
        else:
            p = pac.random_pac(n, 5, 5, rng, pac.COMPLETE, coherent=0.5)
            sat, _ = pac.decide_pac55(p, small_cutoff=cutoff, stats=stats)
        row.update(algo=family, nodes=stats.outer.nodes + sum(s.nodes for s in stats.inner),
                   result=int(sat))
    elif family == "min2sat":
        inst = random_complete_instance(n, 2, 2, rng, 1, 2)
        outcome, sdp = min2sat.min2sat_approx(inst, seed, trials=32)
        row.update(algo="min2sat", nodes=sdp.iterations, result=outcome.cost,
                   sdp=f"{sdp.objective:.4f}")
        if n <= 16:
            opt = min_unsat_bruteforce(inst)[0]
            row["opt"] = opt
            row["ratio"] = f"{outcome.cost / opt:.4f}" if opt else ""
    row["seconds"] = time.perf_counter() - start
    return row


def cmd_bench(args) -> int:
    ns = _ints(args.n_values)
    children = np.random.SeedSequence(args.seed).spawn(len(ns) * args.reps)
    tasks = []
    for i, n in enumerate(ns):
        for rep in range(args.reps):
            seed = int(children[i * args.reps + rep].generate_state(1)[0])
            tasks.append((args.family, n, rep, seed, args.small_cutoff))
    if args.threads > 1:
        with ProcessPoolExecutor(max_workers=args.threads) as pool:
            rows = list(pool.map(_bench_task, tasks))
    else:
        rows = [_bench_task(t) for t in tasks]

    cols = ["family", "algo", "n", "rep", "seed", "result", "nodes"]
    if args.family == "min2sat":
        cols += ["sdp", "opt", "ratio"]
    if args.timing:
        cols.append("seconds")
        for row in rows:
            row["seconds"] = f"{row['seconds']:.4f}"
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=cols, extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    sys.stdout.write(buf.getvalue())

    if args.out:
        from . import plotting
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{args.family}.csv").write_text(buf.getvalue())
        made = [plotting.plot_metric(rows, "nodes", out / f"{args.family}_nodes.png",
                                     f"{args.family}: search nodes")]
        if args.timing:
            made.append(plotting.plot_metric(rows, "seconds", out / f"{args.family}_seconds.png",
                                             f"{args.family}: wall time"))
        if args.family == "min2sat":
            ratios = [float(r["ratio"]) for r in rows if r.get("ratio")]
            made.append(plotting.plot_ratio_histogram(ratios, out / "min2sat_ratio.png"))
        for path in made:
            print(f"c figure {path}", file=sys.stderr)
    return EXIT_OK


# -- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--timing", action="store_true", help="report wall time")

    ap = argparse.ArgumentParser(prog="ccsp", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", parents=[common], help="validate an instance file")
    p.add_argument("file")
    p.add_argument("--pac", nargs=3, metavar=("R", "L", "MODE"))
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("solve", parents=[common], help="decide or enumerate an instance")
    p.add_argument("file")
    p.add_argument("--algo", choices=ALGOS, default="auto")
    p.add_argument("--enumerate", action="store_true")
    p.add_argument("--pac", nargs=3, metavar=("R", "L", "MODE"))
    p.add_argument("--small-cutoff", type=int, default=None,
                   help="exhaust when at most this many variables are unfixed")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("gen", parents=[common], help="generate an instance")
    p.add_argument("family", choices=("random", "allpos", "symmetric", "pac", "cnf", "densify",
                                      "product", "gadget", "from-cnf"))
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--r", type=int, default=2)
    p.add_argument("--m", type=int, help="clause count for cnf")
    p.add_argument("--min-tuples", type=int, default=1)
    p.add_argument("--max-tuples", type=int, default=1)
    p.add_argument("--planted", action="store_true")
    p.add_argument("--S", help="accepted true-counts, comma separated")
    p.add_argument("--signs", choices=("none", "random"), default="none")
    p.add_argument("--r-pac", type=int, default=4, help="PAC alphabet size")
    p.add_argument("--l", type=int, default=3)
    p.add_argument("--mode", choices=(pac.COMPLETE, pac.OVER), default=pac.OVER)
    p.add_argument("--coherent", type=float, default=0.0)
    p.add_argument("--input", help="DIMACS CNF input")
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("--t", type=int)
    p.add_argument("--kind", choices=reductions.KINDS)
    p.add_argument("--sigma", help="csp33 forbidden triple, e.g. 0,1,1")
    p.add_argument("--max-tries", type=int, default=20)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("min2sat", parents=[common], help="approximate complete Min-2-SAT")
    p.add_argument("file")
    p.add_argument("--sdp-iters", type=int, default=5000)
    p.add_argument("--trials", type=int, default=32)
    p.add_argument("--exact", action="store_true", help="also compute OPT (n <= 16)")
    p.set_defaults(func=cmd_min2sat)

    p = sub.add_parser("bench", parents=[common], help="run a family across n, emit CSV")
    p.add_argument("family", choices=BENCH_FAMILIES)
    p.add_argument("--n-values", default="6,8,10")
    p.add_argument("--reps", type=int, default=3)
    p.add_argument("--small-cutoff", type=int, default=None)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", help="directory for the CSV copy and figures")
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERR if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (OSError, CcspError, UsageError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERR


if __name__ == "__main__":
    sys.exit(main())
