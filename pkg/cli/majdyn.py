#!/usr/bin/env python3
"""
majdyn - Standalone CLI for majority-dynamics simulations and experiments.

Every run echoes its fully resolved configuration into its outputs, and
any of those outputs can be handed back with --config to replay the run.

Usage:
    python3 cli/majdyn.py simulate --graph gnp --n 2000 --p 0.01 --seed 7
    python3 cli/majdyn.py simulate --graph level --depth 12 --seed 3
    python3 cli/majdyn.py simulate --edge-list graph.txt --opinions all-plus
    python3 cli/majdyn.py experiment gnp-unanimity --n 4096 --p 0.06 --trials 200
    python3 cli/majdyn.py experiment phase-sweep --param d_grid=1:8:1
    python3 cli/majdyn.py analyze fourier --maj 5
    python3 cli/majdyn.py analyze stability --maj 15 --rho-grid 0:1:0.1
    python3 cli/majdyn.py analyze mixing --n 2000 --p 0.1
    python3 cli/majdyn.py analyze overlap --n1 5 --n2 7 --m 3
    python3 cli/majdyn.py analyze regularity --edge-list graph.txt --self-weight 1
    python3 cli/majdyn.py analyze percolation --graph rrg --n 100000 --d 4
    python3 cli/majdyn.py list
    python3 cli/majdyn.py simulate --config runs/simulate/outcome.json   # replay
"""

import sys
import argparse
import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

# Add parent directory to path for imports
SCRIPT_DIR = Path(__file__).parent
REPO_ROOT = SCRIPT_DIR.parent
sys.path.insert(0, str(REPO_ROOT))

try:
    from src import __version__
    from src.analysis import (
        DEFAULT_POWER_MAX_ITER,
        DEFAULT_POWER_TOL,
        arcsin_stability,
        estimate_lambda,
        fourier_spectrum,
        maj_singleton_fraction,
        majority_truth_table,
        mixing_lemma_check,
        noise_stability,
        overlap_correlation_exact,
        overlap_lower_bound,
    )
    from src.config import RunConfig, get_output_path, load_config, resolve_seed, setup_logging
    from src.dynamics import DEFAULT_MAX_ENUM_DEGREE, flip_bound, run, validate_regularity
    from src.errors import EXIT_BUDGET_OR_FAIL, EXIT_ERROR, EXIT_OK, describe_error
    from src.experiments import get_experiment, list_experiments
    from src.experiments.base import make_graph
    from src.generators import LevelGraphSpec, Rng, constant_opinions, gen_gnp, gen_opinions_iid
    from src.graph_core import Graph, read_edge_list
    from src.io_formats import write_json, write_table_csv, write_trace_csv
    from src.percolation import cluster_report, two_stage_percolation
    from src.validation import (
        MAX_TRIALS,
        collect_errors,
        parse_rho_grid,
        validate_enum,
        validate_odd,
        validate_positive_int,
        validate_degree,
        validate_probability,
    )
except ImportError as e:
    print(f"Error: Could not import modules: {e}")
    print(f"Make sure you're running from the majdyn repository root")
    print(f"Expected path: {REPO_ROOT}")
    sys.exit(1)

logger = logging.getLogger("majdyn.cli")

# CLI family names; "tree" is the ball of the d-regular tree
GRAPH_FAMILIES = ['gnp', 'rrg', 'tree', 'level', 'cycle', 'path', 'complete']
FAMILY_KEYS = {'tree': 'tree-ball'}
OPINION_MODES = ['iid', 'all-plus', 'all-minus']
WEIGHTINGS = ['none', 'odd', 'uniform']
LOG_LEVELS = ['DEBUG', 'INFO', 'WARNING', 'ERROR']

# Families whose --d is an exact vertex degree rather than a mean degree
INTEGRAL_DEGREE_FAMILIES = ('rrg', 'tree', 'tree-ball')

# Required graph parameters per family (gnp also needs p or d)
REQUIRED_GRAPH_PARAMS = {
    'gnp': ('n',),
    'rrg': ('n', 'd'),
    'tree': ('d',),
    'level': (),
    'cycle': ('n',),
    'path': ('n',),
    'complete': ('n',),
}
DEFAULT_LEVEL_DEPTH = 6
DEFAULT_TREE_RADIUS = 5
DEFAULT_MIXING_SAMPLES = 1000

# Generic experiment flags forwarded as parameters when given
EXPERIMENT_FLAGS = [
    'n', 'p', 'd', 'q', 'trials', 'horizon', 'family', 'eps', 'depth', 'radius',
    'steps', 'samples', 'weighted', 'self_weight', 'k_max', 'n_max', 'c',
]


# ============================================================================
# Resolution helpers
# ============================================================================


def load_settings(args) -> Dict[str, Any]:
    """config/majdyn.json plus --settings overlay plus numeric-budget flags."""
    settings = load_config(args.settings)
    generators = settings.setdefault('generators', {})
    analysis = settings.setdefault('analysis', {})
    if args.max_attempts is not None:
        generators['rrg_max_attempts'] = args.max_attempts
    if args.max_iter is not None:
        analysis['power_max_iter'] = args.max_iter
    if args.tol is not None:
        analysis['power_tol'] = args.tol
    if args.max_enum_degree is not None:
        analysis['max_enum_degree'] = args.max_enum_degree
    return settings


def resolve_workers(cli_workers: Optional[int], settings: Dict[str, Any]) -> int:
    workers = cli_workers or settings.get('defaults', {}).get('workers')
    return max(1, int(workers or os.cpu_count() or 1))


def default_out_dir(settings: Dict[str, Any], label: str) -> str:
    root = settings.get('defaults', {}).get('out_dir', 'runs')
    return str(Path(root) / label)


def echoed_settings(settings: Dict[str, Any]) -> Dict[str, Any]:
    """The config sections that can change results."""
    return {k: settings.get(k, {}) for k in ('dynamics', 'generators', 'analysis', 'experiments')}


def parse_degree(text: str) -> Union[int, float]:
    """argparse type for --d, shared by every command: int when integral, float otherwise."""
    value, error = validate_degree(text, 'd')
    if error:
        raise argparse.ArgumentTypeError(error)
    return value


def parse_param(text: str) -> Tuple[str, Any]:
    """Parse key=value; the value is read as JSON when it parses, else kept as text."""
    if '=' not in text:
        raise ValueError(f"expected key=value, got {text!r}")
    key, raw = text.split('=', 1)
    key = key.strip().replace('-', '_')
    if not key:
        raise ValueError(f"empty parameter name in {text!r}")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key, value


def graph_from_args(args, settings: Dict[str, Any]) -> Dict[str, Any]:
    generators = settings.get('generators', {})
    graph = {
        'family': None if args.edge_list else (args.graph or 'gnp'),
        'edge_list': args.edge_list,
        'n': args.n,
        'p': args.p,
        'd': args.d,
        'radius': args.radius,
        'depth': args.depth,
        'weighted': args.weighted or 'none',
        'max_attempts': generators.get('rrg_max_attempts'),
        'require_connected': bool(args.require_connected or generators.get('rrg_require_connected', False)),
    }
    if graph['family'] == 'tree' and graph['radius'] is None:
        graph['radius'] = DEFAULT_TREE_RADIUS
    if graph['family'] == 'level' and graph['depth'] is None:
        graph['depth'] = DEFAULT_LEVEL_DEPTH
    return graph


def validate_graph(graph: Dict[str, Any]) -> List[str]:
    errors = collect_errors(
        validate_positive_int(graph.get('n'), 'n'),
        validate_degree(graph.get('d'), 'd', integral=graph.get('family') in INTEGRAL_DEGREE_FAMILIES),
        validate_positive_int(graph.get('radius'), 'radius', min_val=0),
        validate_positive_int(graph.get('depth'), 'depth'),
        validate_probability(graph.get('p'), 'p'),
        validate_enum(graph.get('weighted'), 'weighted', WEIGHTINGS, default='none'),
    )
    if graph.get('edge_list'):
        if graph.get('weighted', 'none') != 'none':
            errors.append("Invalid weighted: edge-list weights come from the file")
        return errors

    family = graph.get('family')
    _, error = validate_enum(family, 'graph', GRAPH_FAMILIES)
    if error:
        return errors + [error]
    for key in REQUIRED_GRAPH_PARAMS[family]:
        if graph.get(key) is None:
            errors.append(f"Missing required parameter for --graph {family}: --{key}")
    if family == 'gnp' and graph.get('p') is None and graph.get('d') is None:
        errors.append("Missing required parameter for --graph gnp: --p or --d")
    return errors


def build_graph(graph: Dict[str, Any], rng: Rng, matrix_free_level: bool = False) -> Union[Graph, LevelGraphSpec]:
    """
    Build the graph a RunConfig describes.

    Unweighted level graphs come back as a LevelGraphSpec when
    matrix_free_level is set, so deep levels never get materialized.
    """
    if graph.get('edge_list'):
        with open(Path(graph['edge_list']).expanduser()) as f:
            return read_edge_list(f)

    family = graph['family']
    if family == 'level' and matrix_free_level and graph.get('weighted', 'none') == 'none':
        return LevelGraphSpec(graph.get('depth') or DEFAULT_LEVEL_DEPTH)

    params = {k: v for k, v in graph.items() if v is not None and k not in ('family', 'edge_list')}
    return make_graph(FAMILY_KEYS.get(family, family), params, rng)


def build_opinions(mode: str, n: int, q: float, rng: Rng):
    if mode == 'all-plus':
        return constant_opinions(n, 1)
    if mode == 'all-minus':
        return constant_opinions(n, -1)
    return gen_opinions_iid(n, q, rng)


# ============================================================================
# Commands (each takes a RunConfig, writes its outputs, returns payload + code)
# ============================================================================


def run_simulate(rc: RunConfig) -> Tuple[Dict[str, Any], int]:
    graph, dyn = rc.graph, rc.dynamics
    root = Rng(rc.seed, 0)
    target = build_graph(graph, root, matrix_free_level=True)
    n = target.n
    x0 = build_opinions(dyn['opinions'], n, dyn['q'], root.child(1))

    regularity = None
    if isinstance(target, Graph) and target.is_weighted:
        max_enum = rc.settings.get('analysis', {}).get('max_enum_degree', DEFAULT_MAX_ENUM_DEGREE)
        if n and int(target.degrees().max()) > max_enum:
            logger.warning(f"max degree above {max_enum}; relying on runtime tie detection")
        else:
            regularity = validate_regularity(target, dyn['self_weight'], max_enum)

    trace, outcome = run(
        target,
        x0,
        max_steps=dyn['horizon'],
        self_weight=dyn['self_weight'],
        check_invariants=dyn['check_invariants'],
    )

    echo = rc.to_dict()
    out = get_output_path(rc.out_dir)
    trace_path = write_trace_csv(out / 'trace.csv', trace, echo)

    payload: Dict[str, Any] = {
        'version': __version__,
        'outcome': outcome.to_dict(),
        'graph': {
            'n': n,
            'm': target.m if isinstance(target, Graph) else None,
            'weighted': isinstance(target, Graph) and target.is_weighted,
        },
        'ever_unanimous': trace.ever_unanimous(),
        'average_flips': trace.average_flips(),
        'final_potential': trace.potentials[-1],
    }
    if regularity is None and isinstance(target, Graph) and n and not target.is_weighted:
        regularity = validate_regularity(target)
    if regularity is not None:
        _, bound = flip_bound(trace, regularity, strict=dyn['check_invariants'])
        payload['regularity'] = {'epsilon': regularity.epsilon, 'W': regularity.W, 'flip_bound': bound}

    payload['files'] = [str(trace_path), str(out / 'outcome.json')]
    payload['config'] = echo
    write_json(out / 'outcome.json', payload)

    code = EXIT_OK if outcome.converged else EXIT_BUDGET_OR_FAIL
    return payload, code


def run_experiment(rc: RunConfig) -> Tuple[Dict[str, Any], int]:
    spec = rc.experiment
    cls = get_experiment(spec['id'])
    unknown = sorted(set(spec.get('params', {})) - set(cls.defaults))
    if unknown:
        logger.warning(f"{spec['id']} ignores parameter(s): {', '.join(unknown)}")

    experiment = cls(
        params=spec.get('params', {}),
        seed=rc.seed,
        workers=rc.workers,
        thresholds=spec.get('thresholds', {}),
        trace_cap=spec.get('trace_cap', 0),
        config=rc.to_dict(),
    )
    report = experiment.run()
    paths = report.write(get_output_path(rc.out_dir))

    payload = report.to_dict()
    payload.pop('records', None)
    payload['files'] = [str(p) for p in paths]
    return payload, EXIT_OK if report.passed else EXIT_BUDGET_OR_FAIL


def _analyze_fourier(rc: RunConfig, out: Path) -> Tuple[Dict[str, Any], int]:
    k = rc.experiment['maj']
    table = fourier_spectrum(majority_truth_table(k), k)
    rows = [
        [mask, bin(mask).count('1'), coeff, str(table.exact_coefficient(mask))]
        for mask, coeff in table.to_rows()
    ]
    csv_path = write_table_csv(out / f'fourier_maj{k}.csv', ['mask', 'size', 'coefficient', 'exact'], rows, rc.to_dict())
    singleton = maj_singleton_fraction(k)
    payload = {
        'k': k,
        'nonzero_coefficients': len(rows),
        'singleton': float(singleton),
        'singleton_exact': str(singleton),
        'parseval': str(table.parseval_exact()),
        'level_weights': table.level_weights().tolist(),
        'files': [str(csv_path)],
    }
    return payload, EXIT_OK


def _analyze_stability(rc: RunConfig, out: Path) -> Tuple[Dict[str, Any], int]:
    k = rc.experiment['maj']
    grid, error = parse_rho_grid(rc.experiment['rho_grid'])
    if error:
        raise ValueError(error)
    table = fourier_spectrum(majority_truth_table(k), k)
    rows = []
    for rho in grid:
        stab = noise_stability(table, rho)
        limit = arcsin_stability(rho)
        rows.append([rho, stab, limit, stab - limit])
    csv_path = write_table_csv(out / f'stability_maj{k}.csv', ['rho', 'stability', 'arcsin_limit', 'gap'], rows, rc.to_dict())
    payload = {
        'k': k,
        'points': len(rows),
        'rows': rows,
        'stability_below_rho': all(r[1] <= r[0] + 1e-12 for r in rows),
        'files': [str(csv_path)],
    }
    return payload, EXIT_OK


def _analyze_mixing(rc: RunConfig, out: Path) -> Tuple[Dict[str, Any], int]:
    spec = rc.experiment
    n, p = spec['n'], spec['p']
    analysis = rc.settings.get('analysis', {})
    root = Rng(rc.seed, 0)
    g = gen_gnp(n, p, root.child(0))
    estimate = estimate_lambda(
        g,
        p,
        root.child(1),
        tol=analysis.get('power_tol', DEFAULT_POWER_TOL),
        max_iter=analysis.get('power_max_iter', DEFAULT_POWER_MAX_ITER),
    )
    check = mixing_lemma_check(g, p, estimate.lam, spec['samples'], root.child(2), loops=estimate.loops)
    within = estimate.lam <= estimate.reference_bound
    payload = {
        'estimate': estimate.to_dict(),
        'lambda_within_bound': within,
        'discrepancy': check.to_dict(),
        'passed': within and check.passed,
    }
    return payload, EXIT_OK if payload['passed'] else EXIT_BUDGET_OR_FAIL


def _analyze_overlap(rc: RunConfig, out: Path) -> Tuple[Dict[str, Any], int]:
    n1, n2, m = rc.experiment['n1'], rc.experiment['n2'], rc.experiment['m']
    exact = overlap_correlation_exact(n1, n2, m)
    bound = overlap_lower_bound(n1, n2, m)
    payload = {
        'n1': n1,
        'n2': n2,
        'm': m,
        'correlation': float(exact),
        'correlation_exact': str(exact),
        'lower_bound': bound,
        'bound_holds': float(exact) >= bound - 1e-12,
    }
    return payload, EXIT_OK


def _analyze_regularity(rc: RunConfig, out: Path) -> Tuple[Dict[str, Any], int]:
    g = build_graph(rc.graph, Rng(rc.seed, 0))
    self_weight = rc.dynamics.get('self_weight', 1.0)
    max_enum = rc.settings.get('analysis', {}).get('max_enum_degree', DEFAULT_MAX_ENUM_DEGREE)
    params = validate_regularity(g, self_weight, max_enum)
    payload = {
        'n': g.n,
        'm': g.m,
        'weighted': g.is_weighted,
        'self_weight': self_weight,
        'epsilon': params.epsilon,
        'W': params.W,
        'flip_bound': params.flip_bound,
    }
    return payload, EXIT_OK


def _analyze_percolation(rc: RunConfig, out: Path) -> Tuple[Dict[str, Any], int]:
    spec = rc.experiment
    root = Rng(rc.seed, 0)
    g = build_graph(rc.graph, root)
    x0 = gen_opinions_iid(g.n, spec['q'], root.child(1))
    clusters = cluster_report(g, x0)
    payload: Dict[str, Any] = {
        'n': g.n,
        'm': g.m,
        'clusters': clusters.to_dict(),
        'both_sign_cycles': clusters.both_cycles,
    }
    if spec.get('p_base') is not None:
        two_stage = two_stage_percolation(g, spec['p_base'], spec['eps'], root.child(3))
        payload['two_stage'] = two_stage.to_dict()
    return payload, EXIT_OK


ANALYSES = {
    'fourier': _analyze_fourier,
    'stability': _analyze_stability,
    'mixing': _analyze_mixing,
    'overlap': _analyze_overlap,
    'regularity': _analyze_regularity,
    'percolation': _analyze_percolation,
}


def run_analysis(rc: RunConfig) -> Tuple[Dict[str, Any], int]:
    name = rc.experiment['analysis']
    if name not in ANALYSES:
        raise ValueError(f"unknown analysis {name!r}; expected one of {sorted(ANALYSES)}")
    out = get_output_path(rc.out_dir)
    payload, code = ANALYSES[name](rc, out)
    payload = {'analysis': name, 'version': __version__, **payload, 'config': rc.to_dict()}
    write_json(out / 'analysis.json', payload)
    return payload, code


RUNNERS = {
    'simulate': run_simulate,
    'experiment': run_experiment,
    'analyze': run_analysis,
}


def execute(rc: RunConfig) -> Tuple[Dict[str, Any], int]:
    """Run a resolved configuration; the single path shared by fresh runs and replays."""
    if rc.command not in RUNNERS:
        raise ValueError(f"cannot replay command {rc.command!r}")
    logger.info(f"{rc.command}: seed={rc.seed}, out={rc.out_dir}")
    return RUNNERS[rc.command](rc)


# ============================================================================
# RunConfig construction from flags
# ============================================================================


def simulate_config(args, settings: Dict[str, Any], seed: int) -> Tuple[Optional[RunConfig], List[str]]:
    graph = graph_from_args(args, settings)
    dyn_settings = settings.get('dynamics', {})
    horizon = args.horizon
    if horizon is None:
        # the level graph is only interesting up to its depth
        horizon = graph['depth'] if graph['family'] == 'level' else dyn_settings.get('horizon', 10_000)
    dynamics = {
        'opinions': args.opinions or 'iid',
        'q': 0.5 if args.q is None else args.q,
        'horizon': horizon,
        'self_weight': dyn_settings.get('self_weight', 1.0) if args.self_weight is None else args.self_weight,
        'check_invariants': dyn_settings.get('check_invariants', True) and not args.no_checks,
    }

    errors = validate_graph(graph) + collect_errors(
        validate_enum(dynamics['opinions'], 'opinions', OPINION_MODES),
        validate_probability(dynamics['q'], 'q'),
        validate_positive_int(dynamics['horizon'], 'horizon', min_val=2),
    )
    if not dynamics['self_weight'] > 0:
        errors.append(f"Invalid self-weight: must be positive, got {dynamics['self_weight']}")
    if errors:
        return None, errors

    rc = RunConfig(
        command='simulate',
        graph=graph,
        dynamics=dynamics,
        seed=seed,
        out_dir=args.out or default_out_dir(settings, 'simulate'),
        workers=1,
        settings=echoed_settings(settings),
    )
    return rc, []


def experiment_config(args, settings: Dict[str, Any], seed: int) -> Tuple[Optional[RunConfig], List[str]]:
    params = {key: getattr(args, key) for key in EXPERIMENT_FLAGS if getattr(args, key, None) is not None}
    if args.require_connected:
        params['require_connected'] = True
    if args.gate_time3:
        params['gate_time3'] = True

    errors = collect_errors(
        validate_positive_int(params.get('n'), 'n'),
        validate_positive_int(params.get('trials'), 'trials', max_val=MAX_TRIALS),
        validate_positive_int(params.get('horizon'), 'horizon', min_val=2),
        validate_positive_int(params.get('depth'), 'depth'),
        validate_degree(params.get('d'), 'd', integral=params.get('family') in INTEGRAL_DEGREE_FAMILIES),
        validate_probability(params.get('p'), 'p'),
        validate_probability(params.get('q'), 'q'),
        validate_probability(params.get('eps'), 'eps', open_low=True, open_high=True),
    )
    thresholds = {k: v for k, v in settings.get('experiments', {}).items() if k != 'trace_csv_cap'}
    for text in args.param or []:
        try:
            key, value = parse_param(text)
        except ValueError as e:
            errors.append(f"Invalid --param: {e}")
            continue
        params[key] = value
    for text in args.threshold or []:
        try:
            key, value = parse_param(text)
        except ValueError as e:
            errors.append(f"Invalid --threshold: {e}")
            continue
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            errors.append(f"Invalid --threshold {key}: must be a number, got {value!r}")
            continue
        thresholds[key] = float(value)
    if errors:
        return None, errors

    trace_cap = args.trace_cap
    if trace_cap is None:
        trace_cap = settings.get('experiments', {}).get('trace_csv_cap', 0)

    rc = RunConfig(
        command='experiment',
        experiment={'id': args.experiment_id, 'params': params, 'thresholds': thresholds, 'trace_cap': int(trace_cap)},
        seed=seed,
        out_dir=args.out or default_out_dir(settings, args.experiment_id),
        workers=resolve_workers(args.workers, settings),
        settings=echoed_settings(settings),
    )
    return rc, []


def analysis_config(args, settings: Dict[str, Any], seed: int) -> Tuple[Optional[RunConfig], List[str]]:
    name = args.analysis
    spec: Dict[str, Any] = {'analysis': name}
    graph: Dict[str, Any] = {}
    dynamics: Dict[str, Any] = {}
    errors: List[str] = []

    if name in ('fourier', 'stability'):
        spec['maj'] = args.maj
        errors += collect_errors(validate_odd(args.maj, 'maj'))
        if args.maj is None:
            errors.append("Missing required parameter: --maj")
        if name == 'stability':
            spec['rho_grid'] = args.rho_grid
            errors += collect_errors(parse_rho_grid(args.rho_grid))
    elif name == 'mixing':
        spec.update({'n': args.n, 'p': args.p, 'samples': args.samples})
        errors += collect_errors(
            validate_positive_int(args.n, 'n'),
            validate_probability(args.p, 'p', open_low=True),
            validate_positive_int(args.samples, 'samples', max_val=MAX_TRIALS),
        )
        if args.n is None or args.p is None:
            errors.append("Missing required parameter: --n and --p")
    elif name == 'overlap':
        spec.update({'n1': args.n1, 'n2': args.n2, 'm': args.m})
        errors += collect_errors(
            validate_odd(args.n1, 'n1'),
            validate_odd(args.n2, 'n2'),
            validate_positive_int(args.m, 'm', min_val=0),
        )
        if None in (args.n1, args.n2, args.m):
            errors.append("Missing required parameter: --n1, --n2 and --m")
    else:
        graph = graph_from_args(args, settings)
        errors += validate_graph(graph)
        if name == 'regularity':
            dynamics['self_weight'] = args.self_weight
            if not args.self_weight > 0:
                errors.append(f"Invalid self-weight: must be positive, got {args.self_weight}")
        else:
            spec.update({'q': args.q, 'p_base': args.p_base, 'eps': args.eps})
            errors += collect_errors(
                validate_probability(args.q, 'q'),
                validate_probability(args.p_base, 'p-base', open_low=True),
                validate_probability(args.eps, 'eps', open_low=True),
            )

    if errors:
        return None, errors
    rc = RunConfig(
        command='analyze',
        graph=graph,
        dynamics=dynamics,
        experiment=spec,
        seed=seed,
        out_dir=args.out or default_out_dir(settings, name),
        workers=1,
        settings=echoed_settings(settings),
    )
    return rc, []


CONFIG_BUILDERS = {
    'simulate': simulate_config,
    'experiment': experiment_config,
    'analyze': analysis_config,
}


# ============================================================================
# Output
# ============================================================================


def print_payload(command: str, payload: Dict[str, Any], code: int) -> None:
    """Human-readable summary of a run."""
    if command == 'simulate':
        outcome = payload['outcome']
        graph = payload['graph']
        entry = outcome['entry_time']
        print(f"Outcome: {outcome['kind']}" + (f" (T* = {entry})" if entry is not None else ""))
        print(f"Graph: n={graph['n']}" + (f", m={graph['m']}" if graph['m'] is not None else " (matrix-free)"))
        print(f"Steps: {outcome['steps']}  final mean: {outcome['final_mean']:+.6f}")
        print(f"Average lag-2 flips: {payload['average_flips']:.4f}")
        if 'regularity' in payload:
            reg = payload['regularity']
            print(f"Flip bound 2W/epsilon: {reg['flip_bound']:.4f} (epsilon={reg['epsilon']:g}, W={reg['W']:g})")
    elif command == 'experiment':
        status = "PASS" if payload['passed'] else "FAIL"
        print(f"{payload['experiment_id']}: {status} ({payload['trials']} trials, seed {payload['seed']})")
        print("-" * 60)
        for gate in payload['gates']:
            mark = "ok " if gate['passed'] else ("-- " if not gate['gated'] else "XX ")
            interval = gate.get('interval')
            ci = f" CI [{interval[0]:.4g}, {interval[1]:.4g}]" if interval else ""
            print(f"  {mark}{gate['name']}: {gate['estimate']:.4g} {gate['direction']} {gate['threshold']:.4g}{ci}")
        for note in payload['notes']:
            print(f"  note: {note}")
    else:
        name = payload['analysis']
        shown = {k: v for k, v in payload.items() if k not in ('config', 'analysis', 'version', 'files', 'rows')}
        print(f"analyze {name}:")
        for key, value in shown.items():
            print(f"  {key}: {json.dumps(value, default=str) if isinstance(value, (dict, list)) else value}")
        for row in payload.get('rows', []):
            print("  " + "  ".join(f"{v:.6f}" for v in row))

    for path in payload.get('files', []):
        print(f"Wrote {path}")
    if code == EXIT_BUDGET_OR_FAIL:
        print("Exit 2: step budget exhausted or gate failed", file=sys.stderr)


# ============================================================================
# Command handlers
# ============================================================================


def cmd_run(args):
    """Shared handler for simulate, experiment and analyze."""
    command = args.command
    try:
        settings = load_settings(args)
        level = args.log_level or settings.get('logging', {}).get('level', 'INFO')
        setup_logging(level, args.log_file or settings.get('logging', {}).get('file'))

        if args.replay:
            rc = RunConfig.from_file(args.replay)
            if rc.command != command:
                logger.warning(f"replaying a '{rc.command}' config from the '{command}' subcommand")
            if args.out:
                rc.out_dir = args.out
            if args.workers:
                rc.workers = args.workers
        else:
            seed = resolve_seed(args.seed, settings)
            rc, errors = CONFIG_BUILDERS[command](args, settings, seed)
            if errors:
                for error in errors:
                    print(f"Error: {error}", file=sys.stderr)
                return EXIT_ERROR

        payload, code = execute(rc)
    except Exception as e:
        message, code = describe_error(e, command)
        print(message, file=sys.stderr)
        return code

    if args.json:
        print(json.dumps(payload, indent=2, default=str))
    else:
        print_payload(rc.command, payload, code)
    return code


def cmd_list(args):
    """List registered experiments."""
    experiments = list_experiments()
    if args.json:
        print(json.dumps([{'id': eid, 'description': desc} for eid, desc in experiments], indent=2))
        return EXIT_OK

    print(f"majdyn {__version__}: {len(experiments)} experiment(s)")
    print("-" * 60)
    for eid, desc in experiments:
        print(f"  {eid:<22} {desc}")
    return EXIT_OK


# ============================================================================
# Parser
# ============================================================================


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--seed', type=int, help='Master seed (default: MAJDYN_SEED, then config)')
    common.add_argument('--out', help='Output directory (default: runs/<command>)')
    common.add_argument('--workers', type=int, metavar='N', help='Trial worker processes (default: all CPUs)')
    common.add_argument('--config', dest='replay', metavar='PATH',
                        help='Replay the config echoed in an outcome.json, report.json or analysis.json')
    common.add_argument('--settings', metavar='PATH', help='JSON overlay for config/majdyn.json')
    common.add_argument('--log-level', choices=LOG_LEVELS, help='Logging level (default: from config)')
    common.add_argument('--log-file', help='Also log to this file (relative paths go to logs/)')
    common.add_argument('--max-attempts', type=int, metavar='N', help='Random regular rejection budget')
    common.add_argument('--max-iter', type=int, metavar='N', help='Power-iteration budget')
    common.add_argument('--tol', type=float, help='Power-iteration relative tolerance')
    common.add_argument('--max-enum-degree', type=int, metavar='N', help='Regularity enumeration cap')
    common.add_argument('--json', action='store_true', help='Output as JSON')
    return common


def _add_graph_args(p: argparse.ArgumentParser) -> None:
    p.add_argument('--graph', choices=GRAPH_FAMILIES, help='Graph family (default: gnp)')
    p.add_argument('--edge-list', metavar='PATH', help="Read the graph from an 'n m' edge-list file")
    p.add_argument('--n', type=int, help='Vertex count')
    p.add_argument('--p', type=float, help='Edge probability (gnp)')
    p.add_argument('--d', type=parse_degree,
                   help='Degree (rrg, tree; integer) or mean degree d = np (gnp; may be fractional)')
    p.add_argument('--radius', type=int, help=f'Tree radius (default: {DEFAULT_TREE_RADIUS})')
    p.add_argument('--depth', type=int, help=f'Level-graph depth (default: {DEFAULT_LEVEL_DEPTH})')
    p.add_argument('--weighted', choices=WEIGHTINGS, help='Edge weights (default: none)')
    p.add_argument('--require-connected', action='store_true', help='Reject disconnected random regular graphs')


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='majdyn',
        description="majdyn - Majority dynamics on finite graphs",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  %(prog)s simulate --graph gnp --n 2000 --p 0.01      Run G(n,p) from iid fair opinions
  %(prog)s simulate --graph level --depth 12           Level graph up to its depth (exit 2)
  %(prog)s experiment gnp-unanimity --trials 200       Unanimity by time 4 on G(n,p)
  %(prog)s experiment flip-bound --weighted odd        Flip bound on odd-weighted graphs
  %(prog)s analyze fourier --maj 5                     Exact spectrum of Maj_5
  %(prog)s analyze stability --maj 15 --rho-grid 0:1:0.1
  %(prog)s analyze mixing --n 2000 --p 0.1             Spectral norm and subset discrepancy
  %(prog)s list                                        Registered experiments

Exit codes: 0 success, 1 error, 2 step budget exhausted or gate failed.
        """
    )
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    common = _common_parser()
    subparsers = parser.add_subparsers(dest='command', help='Command to run')

    # simulate command
    p_sim = subparsers.add_parser('simulate', parents=[common], help='Run the dynamics once and write a trace')
    _add_graph_args(p_sim)
    p_sim.add_argument('--opinions', choices=OPINION_MODES, help='Initial opinions (default: iid)')
    p_sim.add_argument('--q', type=float, help='P(+1) for iid opinions (default: 0.5)')
    p_sim.add_argument('--self-weight', type=float, help='Self-vote weight for weighted graphs')
    p_sim.add_argument('--horizon', type=int, help='Step budget (default: config, or depth for level)')
    p_sim.add_argument('--no-checks', action='store_true', help='Skip per-step invariant checks')
    p_sim.set_defaults(func=cmd_run)

    # experiment command
    p_exp = subparsers.add_parser('experiment', parents=[common], help='Run a registered Monte Carlo experiment')
    p_exp.add_argument('experiment_id', help="Experiment id (see 'list')")
    for flag, kind in (('n', int), ('p', float), ('d', parse_degree), ('q', float), ('trials', int),
                       ('horizon', int), ('eps', float), ('depth', int), ('radius', int),
                       ('steps', int), ('samples', int), ('self-weight', float), ('k-max', int),
                       ('n-max', int), ('c', float)):
        p_exp.add_argument(f'--{flag}', type=kind, dest=flag.replace('-', '_'))
    p_exp.add_argument('--family', choices=['gnp', 'rrg', 'tree-ball', 'cycle', 'path', 'complete', 'level'])
    p_exp.add_argument('--weighted', choices=WEIGHTINGS)
    p_exp.add_argument('--require-connected', action='store_true')
    p_exp.add_argument('--gate-time3', action='store_true', help='Also gate unanimity by t=3')
    p_exp.add_argument('--param', action='append', metavar='KEY=VALUE', help='Any other experiment parameter')
    p_exp.add_argument('--threshold', action='append', metavar='KEY=VALUE', help='Override a gate threshold')
    p_exp.add_argument('--trace-cap', type=int, metavar='N', help='Trials whose trace CSV is kept')
    p_exp.set_defaults(func=cmd_run)

    # analyze command
    p_an = subparsers.add_parser('analyze', help='Exact oracles and single-graph analyses')
    an_sub = p_an.add_subparsers(dest='analysis', help='Analysis to run')

    p_four = an_sub.add_parser('fourier', parents=[common], help='Exact Fourier spectrum of Maj_k')
    p_four.add_argument('--maj', type=int, help='Odd arity k')

    p_stab = an_sub.add_parser('stability', parents=[common], help='Noise stability of Maj_k over a rho grid')
    p_stab.add_argument('--maj', type=int, help='Odd arity k')
    p_stab.add_argument('--rho-grid', default='0:1:0.1', help="start:stop:step or comma list (default: 0:1:0.1)")

    p_mix = an_sub.add_parser('mixing', parents=[common], help='||P - Q|| and subset discrepancy on G(n,p)')
    p_mix.add_argument('--n', type=int)
    p_mix.add_argument('--p', type=float)
    p_mix.add_argument('--samples', type=int, default=DEFAULT_MIXING_SAMPLES)

    p_ov = an_sub.add_parser('overlap', parents=[common], help='E[Maj(x) Maj(y)] with m shared coordinates')
    p_ov.add_argument('--n1', type=int)
    p_ov.add_argument('--n2', type=int)
    p_ov.add_argument('--m', type=int)

    p_reg = an_sub.add_parser('regularity', parents=[common], help='Certify (epsilon, W) for a graph')
    _add_graph_args(p_reg)
    p_reg.add_argument('--self-weight', type=float, default=1.0)

    p_perc = an_sub.add_parser('percolation', parents=[common], help='Same-sign clusters and two-stage percolation')
    _add_graph_args(p_perc)
    p_perc.add_argument('--q', type=float, default=0.5, help='P(+1) of the opinion sample')
    p_perc.add_argument('--p-base', type=float, help='First-stage site probability')
    p_perc.add_argument('--eps', type=float, default=0.05, help='Sprinkle probability')

    for sub in (p_four, p_stab, p_mix, p_ov, p_reg, p_perc):
        sub.set_defaults(func=cmd_run, command='analyze')

    # list command
    p_list = subparsers.add_parser('list', help='List registered experiments')
    p_list.add_argument('--json', action='store_true', help='Output as JSON')
    p_list.set_defaults(func=cmd_list)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        return EXIT_ERROR
    if args.command == 'analyze' and not getattr(args, 'analysis', None):
        print(f"Error: analyze needs one of: {', '.join(sorted(ANALYSES))}", file=sys.stderr)
        return EXIT_ERROR

    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
