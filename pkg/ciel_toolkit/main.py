#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
CIEL reasoning toolkit
Main entry point for command-line operations
"""

import argparse
import logging
import sys

from .config_manager import ConfigManager
from .core import formula as fm
from .core import mucalc
from .core.agentlogic import filtered_model, load_theory
from .core.decide import DecisionLimits, sat
from .core.errors import CielError, ResourceLimitError
from .core.generators import run_soundness_suite, summarize_soundness
from .core.proofs import check_derivation, format_derivation, gen_ind_n, load_derivation
from .core.scenarios import (PuzzleSpec, build_puzzle_model, find_round_counterexample, round_conclusion,
                             round_premises)
from .core.semantics import check, validate
from .core.translate import ciel_to_gel, gel_to_ciel, parse_gel
from .integration.export_engine import ExportEngine
from .performance import performance_monitor

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3


def _configure_logging(level, log_file=None):
    handlers = [logging.StreamHandler(sys.stderr)]
    if log_file:
        handlers.append(logging.FileHandler(log_file))
    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=handlers
    )
    logging.getLogger().setLevel(level)


def build_parser():
    """Argument parser with one subparser per subcommand"""
    parser = argparse.ArgumentParser(prog="ciel", description="CIEL reasoning toolkit")
    parser.add_argument('--config', help='Configuration file (default $CIEL_CONFIG or ./config/ciel.json)')
    parser.add_argument('--log-level', help='Logging level, e.g. DEBUG or WARNING')
    parser.add_argument('--cap-closure', type=int, help='Override limits.closure_cap for this run')
    parser.add_argument('--cap-types', type=int, help='Override limits.type_cap for this run')
    parser.add_argument('--workers', type=int, help='Override performance.max_workers for this run')
    parser.add_argument('--seed', type=int, default=0, help='Seed for randomized corpus generation')
    sub = parser.add_subparsers(dest='command', required=True)

    def formula_args(p):
        p.add_argument('formula', nargs='?', help='Formula text')
        p.add_argument('--file', help='Read the formula from a UTF-8 file instead')

    p = sub.add_parser('parse', help='Parse a formula and echo its syntax tree')
    formula_args(p)
    p.add_argument('--syntax', choices=['ciel', 'gel', 'agent', 'mu'], default='ciel')

    p = sub.add_parser('check', help='Model-check a formula at a world')
    formula_args(p)
    p.add_argument('--model', required=True, help='Model file (JSON)')
    p.add_argument('--world', required=True, help='World identifier')
    p.add_argument('--emit-dot', help='Write the model as a Graphviz file')

    for name, text in (('sat', 'Decide satisfiability'), ('valid', 'Decide validity')):
        p = sub.add_parser(name, help=text)
        formula_args(p)
        p.add_argument('--theory', help='Agent theory file')
        p.add_argument('--witness', help='Write the witness (or countermodel) model file')
        p.add_argument('--stats-csv', help='Append decision statistics to a CSV file')
        p.add_argument('--emit-dot', help='Write the witness as a Graphviz file')

    p = sub.add_parser('translate', help='Translate between GEL, CIEL and the mu-calculus')
    p.add_argument('direction', choices=['gel2ciel', 'ciel2gel', 'ciel2mu'])
    formula_args(p)
    p.add_argument('--theory', help='Agent theory file (ciel2gel)')

    p = sub.add_parser('prove', help='Check or generate derivations')
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument('--check', help='Derivation file to check')
    group.add_argument('--gen-ind', type=int, metavar='N', help='Generate the n-ary induction derivation')
    p.add_argument('--index', nargs='+', default=[], help='Agent formulas psi1 .. psiN for --gen-ind')
    p.add_argument('--body', default='p', help='Body formula for --gen-ind')
    p.add_argument('--theory', help='Agent theory file for the AM side conditions')
    p.add_argument('--output', help='Write the generated derivation to a file')

    p = sub.add_parser('muddy', help='Muddy-children round inference')
    p.add_argument('--n', type=int, required=True, help='Number of rows')
    p.add_argument('--k', type=int, required=True, help='Bits per row')
    p.add_argument('--round', type=int, required=True, help='Queried row (1-based)')
    p.add_argument('--counters', default=None, help='Round counters x1,..,xn')
    p.add_argument('--drop-uncertainty', action='store_true', help='Leave out the uncertainty premise')
    action = p.add_mutually_exclusive_group()
    action.add_argument('--emit-formulas', action='store_true')
    action.add_argument('--emit-model', metavar='FILE')
    action.add_argument('--check', action='store_true')

    p = sub.add_parser('soundness', help='Randomized soundness suite for the axioms and rules')
    p.add_argument('--instances', type=int, default=200)
    p.add_argument('--models', type=int, default=50)
    p.add_argument('--seed', type=int, default=argparse.SUPPRESS, help='Same as the global --seed')
    p.add_argument('--report', help='CSV file for the per-instance records')

    return parser


def _formula_text(args):
    if args.file:
        with open(args.file, 'r', encoding='utf-8') as f:
            return f.read().strip()
    if args.formula is None:
        raise ValueError("a formula or --file is required")
    return args.formula


def run_parse(args, cfg, engine):
    text = _formula_text(args)
    if args.syntax == 'mu':
        formula = mucalc.parse_mu(text)
        print(mucalc.to_text(formula))
    else:
        formula = {'ciel': fm.parse_world, 'gel': parse_gel, 'agent': fm.parse_agent}[args.syntax](text)
        print(fm.to_text(formula, sugar=True))
    print(repr(formula))
    return EXIT_OK


def run_check(args, cfg, engine):
    formula = fm.parse_world(_formula_text(args))
    model = validate(engine.load_model(args.model))
    if args.emit_dot:
        engine.export_dot(model, args.emit_dot)

    with performance_monitor.track("model_check", worlds=len(model.worlds)):
        result = check(model, args.world, formula)
    print("true" if result else "false")
    return EXIT_OK if result else EXIT_NEGATIVE


def run_decide(args, cfg, engine):
    formula = fm.parse_world(_formula_text(args))
    theory = load_theory(args.theory) if args.theory else None
    target = formula if args.command == 'sat' else fm.nneg(formula)
    result = sat(target, theory, DecisionLimits.from_config(cfg), max_workers=cfg.performance.max_workers)

    if args.command == 'sat':
        print(result.verdict)
        positive = result.satisfiable
    else:
        print("INVALID" if result.satisfiable else "VALID")
        positive = not result.satisfiable
    for key, value in result.statistics.items():
        print(f"  {key}: {value}")

    witness_file = args.witness or cfg.output.witness_file
    if result.satisfiable:
        print(f"  world: {result.start}")
        if witness_file:
            engine.save_model(result.witness, witness_file)
            print(f"  model: {witness_file}")
        if args.emit_dot:
            engine.export_dot(result.witness, args.emit_dot)
    if args.stats_csv:
        engine.export_statistics_csv(dict(result.statistics, verdict=result.verdict), args.stats_csv,
                                     formula=fm.to_text(formula, sugar=True))
    return EXIT_OK if positive else EXIT_NEGATIVE


def run_translate(args, cfg, engine):
    text = _formula_text(args)
    if args.direction == 'gel2ciel':
        print(fm.to_text(gel_to_ciel(parse_gel(text)), sugar=True))
    elif args.direction == 'ciel2mu':
        print(mucalc.to_text(mucalc.translate_t(fm.parse_world(text))))
    else:
        formula = fm.parse_world(text)
        theory = load_theory(args.theory) if args.theory else None
        agent_model = filtered_model(fm.agent_subformulae(formula), theory,
                                     cfg.limits.agent_atom_cap)
        print(fm.to_text(ciel_to_gel(formula, agent_model), sugar=True))
        for agent in agent_model.agents:
            print(f"  {agent.name}: {fm.to_text(agent_model.characteristic_of(agent), sugar=True)}")
    return EXIT_OK


def run_prove(args, cfg, engine):
    if args.check:
        derivation = load_derivation(args.check)
        theory = load_theory(args.theory) if args.theory else None
        report = check_derivation(derivation, theory, max_workers=cfg.performance.max_workers,
                                  letter_cap=cfg.limits.taut_letter_cap)
        if report.accepted:
            print(f"accepted ({len(derivation)} lines)")
            return EXIT_OK
        print(f"rejected at line {report.failing_line}: {report.reason}")
        return EXIT_NEGATIVE

    indices = [fm.parse_agent(text) for text in args.index]
    if len(indices) != args.gen_ind:
        raise ValueError(f"--gen-ind {args.gen_ind} needs exactly {args.gen_ind} --index formulas")
    derivation = gen_ind_n(args.gen_ind, indices, fm.parse_world(args.body))
    if args.output:
        engine.export_derivation(derivation, args.output)
    else:
        sys.stdout.write(format_derivation(derivation))
    return EXIT_OK


def run_muddy(args, cfg, engine):
    rounds = tuple(int(x) for x in args.counters.split(',')) if args.counters else ()
    spec = PuzzleSpec(args.n, args.k, rounds)
    world_cap = cfg.limits.puzzle_world_cap

    if args.emit_formulas:
        for premise in round_premises(spec, args.round, args.drop_uncertainty):
            print(fm.to_text(premise, sugar=True))
        print("=> " + fm.to_text(round_conclusion(spec, args.round), sugar=True))
        return EXIT_OK
    if args.emit_model:
        engine.save_model(build_puzzle_model(spec, world_cap), args.emit_model)
        return EXIT_OK

    counterexample = find_round_counterexample(
        spec, args.round, args.drop_uncertainty,
        max_workers=cfg.performance.max_workers,
        submodel_cap=cfg.limits.submodel_world_cap,
        world_cap=world_cap)
    if counterexample is None:
        print("holds")
        return EXIT_OK
    worlds, world = counterexample
    print(f"fails at {world} in the submodel {{{', '.join(worlds)}}}")
    return EXIT_NEGATIVE


def run_soundness(args, cfg, engine):
    records = run_soundness_suite(args.instances, args.models, args.seed)
    summary = summarize_soundness(records)
    print(summary.to_string(index=False))
    if args.report:
        engine.export_soundness_report(records, args.report)
    return EXIT_OK if summary["countermodels"].sum() == 0 else EXIT_NEGATIVE


COMMANDS = {
    'parse': run_parse,
    'check': run_check,
    'sat': run_decide,
    'valid': run_decide,
    'translate': run_translate,
    'prove': run_prove,
    'muddy': run_muddy,
    'soundness': run_soundness,
}


def main(argv=None):
    """Main entry point for the CIEL toolkit"""
    args = build_parser().parse_args(argv)

    cfg = ConfigManager(args.config)
    cfg.override(closure_cap=args.cap_closure, type_cap=args.cap_types, max_workers=args.workers,
                 log_level=args.log_level)
    _configure_logging(cfg.logging.level.upper(), cfg.logging.file)
    engine = ExportEngine(report_dir=cfg.output.report_dir)

    try:
        performance_monitor.configure(cfg.performance.log_file)
        status = COMMANDS[args.command](args, cfg, engine)
    except ResourceLimitError as e:
        logger.error(f"Resource limit: {e}")
        print(f"Error: resource limit: {e}", file=sys.stderr)
        return EXIT_RESOURCE
    except (CielError, ValueError, OSError) as e:
        logger.error(f"{args.command} failed: {e}")
        print(f"Error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except KeyboardInterrupt:
        print("\nOperation cancelled by user.", file=sys.stderr)
        return 130

    if cfg.performance.log_file:
        performance_monitor.log_memory_usage()
    return status


if __name__ == "__main__":
    sys.exit(main())
