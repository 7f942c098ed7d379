#!/usr/bin/env python3
"""
Ramrec CLI
Command-line front end for checking, running and analysing .s1 programs, plus
the corpus runner that replays the acceptance suite over programs/.

Results go to stdout (JSON with --json); logs go to stderr and the log file.
Exit codes: 0 success, 1 user error, 2 internal invariant failure.
"""

import argparse
import json
import logging
import math
import os
import random
import sys
import time
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence

from dotenv import load_dotenv

from bound_analysis import (
    BoundSynthesizer, bound_report, check_normal_invariance, leaking_judgment,
    residual_size, variable_sizes,
)
from cek_machine import cek_run
from evaluator import CostMeter, Environment, SEMANTICS, apply_function, evaluate
from ramrec_errors import InternalError, ProgramNotFound, RamrecError
from ramrec_program import RamrecProgram
from ramrec_syntax import parse_type, pretty
from ramrec_typecheck import Judgment
from ramrec_types import Arrow, GroundType, norm
from value_generators import ValueGenerator, default_seed
from value_heap import (
    Heap, ValueRef, VertexKind, bisimilar, compress, compressed_size, numeral,
    reachable, read_numeral, size, to_dot, total_vertices, tree_size, unshare,
    value_to_term,
)
from vtg_serialization import (
    deserialize, dumps, factor_pipeline, loads, quadratic_constant, serialize,
    to_json, vtg_size,
)

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_USER, EXIT_INTERNAL = 0, 1, 2
PRETTY_LIMIT = 4096
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'


def setup_logging(level: Optional[str] = None, log_file: Optional[str] = None):
    """Configure logging once per process: a log file plus stderr"""
    level = level or os.getenv('RAMREC_LOG_LEVEL', 'INFO')
    log_file = log_file or os.getenv('RAMREC_LOG_FILE', 'ramrec.log')
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format=LOG_FORMAT,
        handlers=[
            logging.FileHandler(log_file),
            logging.StreamHandler(sys.stderr),
        ]
    )


def programs_dir(override: Optional[str] = None) -> str:
    if override:
        return override
    here = os.path.dirname(os.path.abspath(__file__))
    return os.getenv('RAMREC_PROGRAMS_DIR', os.path.join(here, 'programs'))


def emit(data: Any):
    print(json.dumps(data, indent=2, ensure_ascii=False))


# ---------- reports ----------

@dataclass
class RunReport:
    """Outcome of evaluating one ground definition"""
    program: str
    calculus: str
    semantics: str
    expr: str
    type: str
    result: Dict[str, Any]
    meter: Optional[Dict[str, int]] = None
    timings: Dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def describe_value(program: Optional[RamrecProgram], v: ValueRef) -> Dict[str, Any]:
    """Sizes of a result; the pretty form only when its unfolding is small"""
    ts = tree_size(v)
    shown = None
    if ts <= PRETTY_LIMIT:
        term = value_to_term(v.retype(norm(v.type)))
        shown = program.pretty(term) if program else pretty(term)
    return {
        'pretty': shown,
        'size': size(v),
        'compressed_size': compressed_size(v),
        'tree_size': ts,
        'total_vertices': total_vertices(v),
    }


def ground_judgment(program: RamrecProgram, expr: str) -> Judgment:
    judgment = program.judgment(expr)
    if isinstance(judgment.type, Arrow):
        raise RamrecError(f"'{expr}' is a function; pick a ground definition", code='UsageError')
    return judgment


def run_report(program: RamrecProgram, expr: str = 'main', semantics: str = 'dp',
               check_ms: float = 0.0, max_nodes: Optional[int] = None) -> RunReport:
    judgment = ground_judgment(program, expr)
    meter = CostMeter(budget=max_nodes)
    started = time.perf_counter()
    v = evaluate(judgment.subject, Environment(), semantics, meter)
    eval_ms = (time.perf_counter() - started) * 1000
    result = describe_value(program, v)
    metered = meter.to_dict()
    metered.update(result_size=result['size'], result_cs=result['compressed_size'])
    logger.info(f"📊 {program.label}:{expr} ({semantics}) nodes={meter.nodes} size={result['size']}")
    return RunReport(
        program=program.label,
        calculus=program.level.value,
        semantics=semantics,
        expr=expr,
        type=program.format_type(judgment.type),
        result=result,
        meter=metered,
        timings={'check_ms': round(check_ms, 3), 'eval_ms': round(eval_ms, 3)},
    )


def _load(path: str):
    started = time.perf_counter()
    program = RamrecProgram.from_file(path)
    return program, (time.perf_counter() - started) * 1000


# ---------- subcommands ----------

def cmd_check(args) -> int:
    program, _ = _load(args.file)
    judgments = [{'name': name, 'type': program.format_type(program.judgment(name).type)}
                 for name in program.order]
    if args.json:
        emit({'program': program.label, 'calculus': program.level.value, 'judgments': judgments})
    else:
        print(f"✅ {program.label} checks at {program.level.value}")
        for entry in judgments:
            print(f"  {entry['name']} : {entry['type']}")
    return EXIT_OK


def cmd_run(args) -> int:
    program, check_ms = _load(args.file)
    budget = node_budget(args.max_nodes)
    report = run_report(program, args.expr, args.semantics, check_ms, budget)
    if args.dump_dot:
        v = evaluate(ground_judgment(program, args.expr).subject, Environment(), args.semantics,
                     CostMeter(budget=budget))
        _write_dot(args.dump_dot, v, program)
    if args.json:
        emit(report.to_dict())
        return EXIT_OK
    result = report.result
    print(f"{report.expr} : {report.type}")
    print(result['pretty'] if result['pretty'] is not None
          else f"<value with tree size {result['tree_size']}>")
    print(f"size={result['size']} cs={result['compressed_size']} ts={result['tree_size']}")
    if args.meter:
        meter = report.meter
        print(f"nodes={meter['nodes']} fold_steps={meter['fold_steps']} memo_hits={meter['memo_hits']} "
              f"cs_nodes={meter['cs_nodes']} result_size={meter['result_size']} result_cs={meter['result_cs']}")
    return EXIT_OK


def _write_dot(path: str, v: ValueRef, program: RamrecProgram):
    with open(path, 'w', encoding='utf-8') as f:
        f.write(to_dot(v, program.aliases))
    logger.info(f"✅ Wrote {path}")


def _max_steps(value: Optional[int]) -> Optional[int]:
    if value is not None:
        return value
    configured = os.getenv('RAMREC_MAX_STEPS')
    return int(configured) if configured else None


def node_budget(value: Optional[int] = None, default: Optional[int] = None) -> Optional[int]:
    """Derivation-node budget of one evaluation; RAMREC_MAX_NODES when not given"""
    if value is not None:
        return value
    configured = os.getenv('RAMREC_MAX_NODES')
    return int(configured) if configured else default


def cmd_cek(args) -> int:
    program, _ = _load(args.file)
    judgment = ground_judgment(program, args.expr)
    v, steps, lines = cek_run(judgment.subject, Environment(), trace=args.trace,
                              max_steps=_max_steps(args.max_steps))
    result = describe_value(program, v)
    if args.json:
        emit({'program': program.label, 'expr': args.expr, 'type': program.format_type(judgment.type),
              'steps': steps, 'result': result, 'trace': lines if args.trace else None})
        return EXIT_OK
    for line in lines:
        print(line)
    print(result['pretty'] if result['pretty'] is not None else f"<value with tree size {result['tree_size']}>")
    print(f"steps={steps}")
    return EXIT_OK


def _shape(v: ValueRef) -> Dict[str, int]:
    return {'size': size(v), 'total_vertices': total_vertices(v), 'tree_size': tree_size(v)}


def cmd_compress(args) -> int:
    program, _ = _load(args.file)
    v = evaluate(ground_judgment(program, args.expr).subject, Environment(), 'dp')
    c = compress(v)
    if args.dump_dot:
        _write_dot(args.dump_dot, c, program)
    report = {'program': program.label, 'expr': args.expr, 'before': _shape(v), 'after': _shape(c)}
    if args.json:
        emit(report)
    else:
        for label in ('before', 'after'):
            shape = report[label]
            print(f"{label:>6}: size={shape['size']} vertices={shape['total_vertices']} ts={shape['tree_size']}")
    return EXIT_OK


def cmd_serialize(args) -> int:
    program, _ = _load(args.file)
    judgment = ground_judgment(program, args.expr)
    items = serialize(evaluate(judgment.subject, Environment(), 'dp'))
    if args.json:
        emit({'program': program.label, 'expr': args.expr, 'type': program.format_type(judgment.type),
              'items': to_json(items), 'vtg_size': vtg_size(items)})
    else:
        print(dumps(items))
    return EXIT_OK


def cmd_deserialize(args) -> int:
    program = RamrecProgram.from_file(args.program) if args.program else None
    gamma = parse_type(args.type, program.names if program else None)
    if args.input:
        try:
            with open(args.input, encoding='utf-8') as f:
                text = f.read()
        except OSError as e:
            raise ProgramNotFound(f"cannot read {args.input}: {e.strerror}") from e
    else:
        text = sys.stdin.read()
    items = loads(text)
    v = deserialize(gamma, items, strict=not args.lenient)
    result = describe_value(program, v)
    if args.json:
        emit({'type': args.type, 'items': len(items), 'result': result})
    else:
        print(result['pretty'] if result['pretty'] is not None else f"<value with tree size {result['tree_size']}>")
        print(f"size={result['size']} vertices={result['total_vertices']}")
    return EXIT_OK


def cmd_bounds(args) -> int:
    program, _ = _load(args.file)
    reports = [bound_report(program.judgment(name), program.aliases) for name in program.order]
    if args.json:
        emit({'program': program.label, 'calculus': program.level.value,
              'bounds': [report.to_dict() for report in reports]})
        return EXIT_OK
    for report in reports:
        print(f"{report.name} : {report.signature}")
        print(f"  size <= {report.size_bound}")
        print(f"  cost <= {report.cost_bound}")
    return EXIT_OK


def cmd_ni_check(args) -> int:
    program, _ = _load(args.file)
    names = [args.expr] if args.expr else program.order
    seed = args.seed if args.seed is not None else default_seed()
    reports = [check_normal_invariance(program.judgment(name), args.trials, seed) for name in names]
    if args.json:
        emit({'program': program.label, 'reports': [report.to_dict() for report in reports]})
    else:
        for report in reports:
            status = '✅ PASS' if report.passed else '❌ FAIL'
            note = ' (vacuous)' if report.vacuous else f" ({report.trials - report.failures}/{report.trials})"
            print(f"{status} {report.name}{note}")
            if report.counterexample:
                for key, text in report.counterexample.items():
                    print(f"    {key}: {text}")
    return EXIT_OK if all(report.passed for report in reports) else EXIT_USER


def cmd_corpus(args) -> int:
    results = corpus_run(programs_dir(args.dir), quick=args.quick)
    if args.json:
        emit({'criteria': [result.to_dict() for result in results],
              'passed': sum(r.passed for r in results), 'failed': sum(not r.passed for r in results)})
    else:
        print_table(results)
    return EXIT_OK if all(result.passed for result in results) else EXIT_USER


def cmd_serve(args) -> int:
    from ramrec_dashboard import run_dashboard
    run_dashboard(host=args.host, port=args.port, debug=args.debug)
    return EXIT_OK


# ---------- corpus runner ----------

@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    detail: str = ''
    seconds: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


class CorpusRunner:
    """Replays the acceptance criteria against the programs in one directory"""

    def __init__(self, directory: str, quick: bool = False, seed: Optional[int] = None):
        self.directory = directory
        self.quick = quick
        self.seed = default_seed() if seed is None else seed
        self._programs: Dict[str, RamrecProgram] = {}

    def scale(self, full: int, quick: int) -> int:
        return quick if self.quick else full

    def rng(self, salt: int) -> random.Random:
        return random.Random(self.seed * 1000 + salt)

    def program(self, filename: str) -> RamrecProgram:
        if filename not in self._programs:
            self._programs[filename] = RamrecProgram.from_file(os.path.join(self.directory, filename))
        return self._programs[filename]

    def sidecar(self, path: str) -> Dict[str, Any]:
        expected = os.path.splitext(path)[0] + '.expected.json'
        if not os.path.exists(expected):
            return {}
        with open(expected, encoding='utf-8') as f:
            return json.load(f)

    def program_files(self) -> List[str]:
        return sorted(f for f in os.listdir(self.directory) if f.endswith('.s1'))

    def ramified(self) -> List[RamrecProgram]:
        return [p for p in (self.program(f) for f in self.program_files()) if p.level.ramified]

    def criteria(self) -> List[tuple]:
        return [
            (1, "Sharing blow-up of grow", self.sharing_blowup),
            (2, "Height under DP is polynomial", self.height_dp),
            (3, "Height under TD is exponential", self.height_td),
            (4, "Compression matches bisimulation quotient", self.compression_exact),
            (5, "Canonical serialization", self.canonical_serialization),
            (6, "Leaf serialization literal", self.leaf_literal),
            (7, "Quadratic vtg size bound", self.vtg_bound),
            (8, "Ramified typing and rejections", self.ramified_typing),
            (9, "CEK fidelity", self.cek_fidelity),
            (10, "Bound soundness", self.bound_soundness),
            (11, "Normal invariance", self.normal_invariance),
            (12, "Factorization through serialization", self.factorization),
            (13, "Corpus results match sidecars", self.corpus_results),
        ]

    def run(self) -> List[CriterionResult]:
        if not os.path.isdir(self.directory) or not self.program_files():
            logger.warning(f"⚠️ No programs in {self.directory}; nothing to check")
            return []
        results = []
        for number, title, check in self.criteria():
            started = time.perf_counter()
            try:
                passed, detail = check()
            except Exception as e:
                logger.error(f"❌ Criterion {number} raised: {e}")
                passed, detail = False, f"{type(e).__name__}: {e}"
            seconds = time.perf_counter() - started
            logger.info(f"{'✅' if passed else '❌'} {number}. {title} ({seconds:.2f}s)")
            results.append(CriterionResult(number, title, passed, detail, round(seconds, 3)))
        return results

    # criteria

    def sharing_blowup(self):
        grow = self.program('grow.s1').function('grow')
        top = self.scale(20, 10)
        for m in range(1, top + 1):
            v = apply_function(grow, numeral(Heap(), m), 'dp')
            if size(v) != m + 1 or tree_size(v) != 2 ** (m + 1) - 1:
                return False, f"m={m}: size={size(v)} ts={tree_size(v)}"
        return True, f"m=1..{top}"

    def _height_cost(self, m: int, semantics: str):
        program = self.program('height_grow.s1')
        tree = apply_function(program.function('grow'), numeral(Heap(), m), 'dp')
        meter = CostMeter()
        v = apply_function(program.function('height'), tree, semantics, meter)
        return read_numeral(v), meter.nodes

    def height_dp(self):
        top, low = self.scale(60, 20), self.scale(20, 10)
        costs = {}
        for m in range(1, top + 1):
            value, costs[m] = self._height_cost(m, 'dp')
            if value != m:
                return False, f"height(grow({m})) = {value}"
        slope = math.log(costs[top] / costs[low]) / math.log(top / low)
        return slope <= 3.5, f"log-log slope {slope:.2f} over [{low}, {top}]"

    def height_td(self):
        top = self.scale(14, 9)
        for m in range(5, top + 1):
            _, cost = self._height_cost(m, 'td')
            if cost < 2 ** m:
                return False, f"m={m}: cost_td={cost} < 2^{m}"
        return True, f"m=5..{top}"

    def _tree_type(self) -> GroundType:
        return self.program('grow.s1').names.datatypes['tree']

    def compression_exact(self):
        gamma = self._tree_type()
        rng = self.rng(4)
        trials = self.scale(1000, 100)
        for trial in range(trials):
            v = self._small_dag(gamma, rng)
            expected = bisimulation_classes(v)
            if compressed_size(v) != expected:
                return False, f"trial {trial}: cs={compressed_size(v)} quotient={expected}"
        return True, f"{trials} dags"

    def _small_dag(self, gamma: GroundType, rng: random.Random, limit: int = 8) -> ValueRef:
        while True:
            generator = ValueGenerator(Heap(), rng=rng, share_probability=0.5)
            v = generator.value(gamma, rng.randint(0, limit - 1))
            if size(v) <= limit:
                return v

    def canonical_serialization(self):
        gamma = self._tree_type()
        rng = self.rng(5)
        pairs = self.scale(500, 100)
        for trial in range(pairs):
            v = self._small_dag(gamma, rng)
            w = unshare(v) if rng.random() < 0.5 else self._small_dag(gamma, rng)
            if (serialize(v) == serialize(w)) != bisimilar(v, w):
                return False, f"trial {trial}: equality of lists disagrees with bisimilarity"
            back = deserialize(gamma, serialize(v))
            if not bisimilar(back, v) or size(back) != compressed_size(v):
                return False, f"trial {trial}: roundtrip lost the value or its sharing"
        return True, f"{pairs} pairs"

    def leaf_literal(self):
        program = self.program('ltree_leaf.s1')
        expected = self.sidecar(program.path).get('serialization')
        v = evaluate(program.judgment('leaf').subject, Environment(), 'dp')
        items = to_json(serialize(v))
        return items == expected, json.dumps(items, ensure_ascii=False)

    def vtg_bound(self):
        rng = self.rng(7)
        types = [self._tree_type(), self.program('sum_list.s1').names.datatypes['natlist']]
        trials = self.scale(1000, 200)
        for trial in range(trials):
            gamma = types[trial % len(types)]
            c = quadratic_constant(gamma)
            v = ValueGenerator(Heap(), rng=rng).value(gamma, rng.randint(0, 200))
            measured = vtg_size(serialize(v))
            if measured > c * (size(v) + 1) ** 2:
                return False, f"trial {trial}: vtg_size={measured} > {c}*({size(v)}+1)^2"
        return True, f"{trials} values"

    def ramified_typing(self):
        mismatches = []
        for filename in self.program_files():
            program = self.program(filename)
            for name, text in self.sidecar(program.path).get('judgments', {}).items():
                found = program.format_type(program.judgment(name).type)
                if found != text:
                    mismatches.append(f"{filename}:{name} is {found}, expected {text}")
        negative = os.path.join(self.directory, 'negative')
        rejected = 0
        for filename in sorted(os.listdir(negative)) if os.path.isdir(negative) else []:
            if not filename.endswith('.s1'):
                continue
            path = os.path.join(negative, filename)
            code = self.sidecar(path).get('error')
            try:
                RamrecProgram.from_file(path)
                mismatches.append(f"{filename} was accepted")
            except RamrecError as e:
                if e.code != code:
                    mismatches.append(f"{filename} failed with {e.code}, expected {code}")
                else:
                    rejected += 1
        if mismatches:
            return False, '; '.join(mismatches)
        return True, f"{rejected} programs rejected as expected"

    def cek_fidelity(self):
        checked = 0
        for filename in self.program_files():
            program = self.program(filename)
            skipped = set(self.sidecar(program.path).get('td_skip', []))
            for name in program.ground():
                if name in skipped:
                    continue
                subject = program.judgment(name).subject
                meter = CostMeter()
                expected = evaluate(subject, Environment(), 'td', meter)
                v, steps, _ = cek_run(subject, Environment())
                if not bisimilar(v, expected) or steps > 3 * meter.nodes:
                    return False, f"{filename}:{name} steps={steps} cost_td={meter.nodes}"
                checked += 1
        return True, f"{checked} ground definitions"

    def _judgments(self) -> List[Judgment]:
        return [p.judgment(name) for p in self.ramified() for name in p.order]

    def bound_soundness(self):
        rng = self.rng(10)
        trials = self.scale(200, 30)
        checked = 0
        for judgment in self._judgments():
            opened = judgment.open()
            synthesizer = BoundSynthesizer()
            q = synthesizer.size(opened.subject)
            p = synthesizer.cost(opened.subject)
            for _ in range(trials):
                generator = ValueGenerator(Heap(), rng=rng)
                theta = {x: generator.value(gamma, rng.randint(0, 6)) for x, gamma in opened.context}
                sizes = variable_sizes(opened.context, theta)
                residual = residual_size(opened, theta)
                meter = CostMeter()
                evaluate(opened.subject, Environment.of(generator.heap, theta), 'dp', meter)
                if residual > q.evaluate(sizes) or meter.nodes > p.evaluate(sizes):
                    return False, (f"{judgment.name}: residual={residual} q={q.evaluate(sizes)} "
                                   f"cost={meter.nodes} p={p.evaluate(sizes)}")
                checked += 1
        return True, f"{checked} environments"

    def normal_invariance(self):
        trials = self.scale(1000, 100)
        for judgment in self._judgments():
            report = check_normal_invariance(judgment, trials, self.seed)
            if not report.passed:
                return False, f"{report.name} failed {report.failures}/{trials}"
        leak = check_normal_invariance(leaking_judgment(), trials, self.seed)
        if leak.passed:
            return False, "the toNorm leak went unnoticed"
        return True, f"leak caught in {leak.failures}/{trials} trials"

    def factorization(self):
        rng = self.rng(12)
        functions = [
            self.program('height_grow.s1').function('height'),
            self.program('sum_list.s1').function('sum_list'),
            self.program('times_prime.s1').function('plus'),
        ]
        inputs = self.scale(100, 20)
        for fn in functions:
            for _ in range(inputs):
                v = ValueGenerator(Heap(), rng=rng).value(fn.ty.arg, rng.randint(0, 8))
                factor_pipeline(fn, v)
        return True, f"{len(functions)} functions x {inputs} inputs"

    def corpus_results(self):
        mismatches = []
        for filename in self.program_files():
            program = self.program(filename)
            expected = self.sidecar(program.path).get('main')
            if not expected:
                continue
            result = run_report(program, 'main', 'dp').result
            for key, value in expected.items():
                if result.get(key) != value:
                    mismatches.append(f"{filename}: {key}={result.get(key)!r}, expected {value!r}")
        return (not mismatches), '; '.join(mismatches) or 'all sidecars agree'


def bisimulation_classes(v: ValueRef) -> int:
    """Constructor vertices of v up to bisimilarity, by pairwise comparison"""
    heap = v.heap
    representatives: List[int] = []
    for i in reachable(heap, v.root):
        vertex = heap[i]
        if vertex.kind is not VertexKind.CON:
            continue
        here = ValueRef(heap, i, vertex.tag)
        if not any(heap[j].tag == vertex.tag and bisimilar(here, ValueRef(heap, j, heap[j].tag))
                   for j in representatives):
            representatives.append(i)
    return len(representatives)


def corpus_run(directory: Optional[str] = None, quick: bool = False,
               seed: Optional[int] = None) -> List[CriterionResult]:
    return CorpusRunner(programs_dir(directory), quick, seed).run()


def print_table(results: Sequence[CriterionResult]):
    if not results:
        print("⚠️ Empty corpus: nothing to check")
        return
    print("📊 Acceptance Results:")
    print("-" * 30)
    for result in results:
        status = "✅ PASS" if result.passed else "❌ FAIL"
        print(f"{status} {result.number:>2}. {result.title} ({result.seconds:.2f}s) {result.detail}")
    passed = sum(result.passed for result in results)
    print(f"\n📈 Summary: {passed} passed, {len(results) - passed} failed")


# ---------- entry point ----------

class RamrecArgumentParser(argparse.ArgumentParser):
    """Usage errors exit with the user-error code"""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USER, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = RamrecArgumentParser(prog='ramrec', description='Interpreter and analyses for ramified recursion')
    parser.add_argument('--log-level', default=None, help='overrides RAMREC_LOG_LEVEL')
    commands = parser.add_subparsers(dest='command', required=True)

    def command(name: str, handler: Callable, help_text: str, file: bool = True, expr: bool = False):
        sub = commands.add_parser(name, help=help_text)
        if file:
            sub.add_argument('file', help='program (.s1)')
        if expr:
            sub.add_argument('--expr', default='main', help='definition to evaluate (default: main)')
        sub.add_argument('--json', action='store_true', help='print a JSON report')
        sub.set_defaults(handler=handler)
        return sub

    command('check', cmd_check, 'type-check every definition')

    run = command('run', cmd_run, 'evaluate a ground definition', expr=True)
    run.add_argument('--semantics', choices=SEMANTICS, default='dp')
    run.add_argument('--meter', action='store_true', help='print the cost meter')
    run.add_argument('--dump-dot', metavar='PATH', help='write the result dag as Graphviz DOT')
    run.add_argument('--max-nodes', type=int, default=None, help='overrides RAMREC_MAX_NODES')

    cek = command('cek', cmd_cek, 'run the CEK machine', expr=True)
    cek.add_argument('--trace', action='store_true', help='print one line per step')
    cek.add_argument('--max-steps', type=int, default=None, help='overrides RAMREC_MAX_STEPS')

    compress_cmd = command('compress', cmd_compress, 'compare a result before and after compression', expr=True)
    compress_cmd.add_argument('--dump-dot', metavar='PATH', help='write the compressed dag as Graphviz DOT')

    command('serialize', cmd_serialize, 'print the vertex list of a result', expr=True)

    deser = command('deserialize', cmd_deserialize, 'read a vertex list from stdin', file=False)
    deser.add_argument('--type', required=True, help='type of the value, e.g. "mu t0. unit + t0"')
    deser.add_argument('--program', help='program whose datatype names the type may use')
    deser.add_argument('--input', help='read the list from this file instead of stdin')
    deser.add_argument('--lenient', action='store_true', help='skip unreachable items')

    command('bounds', cmd_bounds, 'synthesize size and cost bounds')

    ni = command('ni-check', cmd_ni_check, 'test normal invariance on random environments')
    ni.add_argument('--expr', default=None, help='only this definition')
    ni.add_argument('--trials', type=int, default=1000)
    ni.add_argument('--seed', type=int, default=None, help='overrides RAMREC_SEED')

    corpus = command('corpus', cmd_corpus, 'run the acceptance suite over the corpus', file=False)
    corpus.add_argument('--dir', default=None, help='overrides RAMREC_PROGRAMS_DIR')
    corpus.add_argument('--quick', action='store_true', help='reduced trial counts')

    serve = command('serve', cmd_serve, 'start the web dashboard', file=False)
    serve.add_argument('--host', default='0.0.0.0')
    serve.add_argument('--port', type=int, default=None, help='overrides PORT')
    serve.add_argument('--debug', action='store_true')
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    load_dotenv()
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.log_level)
    try:
        return args.handler(args)
    except RamrecError as e:
        internal = isinstance(e, InternalError)
        logger.error(f"❌ {e}")
        if getattr(args, 'json', False):
            emit({'error': e.to_dict()})
        else:
            print(f"error: {e}", file=sys.stderr)
        return EXIT_INTERNAL if internal else EXIT_USER
    except Exception as e:
        logger.exception(f"❌ Unexpected failure in {args.command}: {e}")
        error = InternalError(f"{type(e).__name__}: {e}")
        if getattr(args, 'json', False):
            emit({'error': error.to_dict()})
        else:
            print(f"error: {error}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == '__main__':
    sys.exit(main())
