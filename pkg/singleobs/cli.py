"""Command line interface to the experiments"""

import argparse
import json
import logging
import os
import sys
import tempfile

from .density import DensityMatrix
from .ensembles import make_coupler
from .exc import (DensityMatrixError, EnsembleError, ExperimentError, FockBasisError, LiftingError,
                  MeasurementError, MetricsError, RecoveryError)
from .experiment import RUNNERS, SweepResult, build_spec, load_config, prepare_coupler, simulate_instance
from .measurement import MeasurementRecord, build_measurement_matrix
from .metrics import fidelity
from .recovery import RecoveryConfig, recover

USAGE_ERRORS = (DensityMatrixError, EnsembleError, ExperimentError, FockBasisError, LiftingError, MeasurementError,
                MetricsError, RecoveryError)


def _counts(text):
    try:
        return [int(r) for r in text.split(",") if r]
    except ValueError:
        raise argparse.ArgumentTypeError(f"Invalid list {text}") from None


def _add_base(parser):
    parser.add_argument("--config", help="JSON file of experiment settings")
    parser.add_argument("--out", help="Output directory")
    parser.add_argument("--solver", choices=["logdet", "least_squares"], help="Recovery solver")
    parser.add_argument("--debug", action="store_true", help="Write a debug log to a temporary file")


def _add_common(parser):
    _add_base(parser)
    parser.add_argument("--seed", type=int, help="Master seed")
    parser.add_argument("--trials", type=int, help="States per rank and coupler")
    parser.add_argument("--couplers", type=int, help="Couplers per point")
    parser.add_argument("--ranks", type=_counts, help="Comma separated ranks")
    parser.add_argument("-N", "--photons", type=int, help="Number of photons")
    parser.add_argument("-m", "--original-ports", type=int, help="Number of input ports")
    parser.add_argument("-M", "--ports", type=int, help="Total number of ports")
    parser.add_argument("--mu", type=float, help="Depolarization fraction")
    parser.add_argument("--snr-db", type=float, help="Measurement SNR in dB")
    parser.add_argument("--noise-model", choices=["total", "per_entry"], help="SNR definition")
    parser.add_argument("--detector", choices=["full", "click"], help="Detector mode")
    parser.add_argument("--coupler", choices=["haar", "evanescent", "block"], help="Coupler family")
    parser.add_argument("--workers", type=int, help="Worker threads")


def build_parser():
    """Argument parser with one subcommand per experiment

    :return: Parser
    :rtype: argparse.ArgumentParser
    """
    parser = argparse.ArgumentParser(prog="singleobs",
                                     description="Single-observable state tomography experiments")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in RUNNERS:
        scenario = sub.add_parser(name, help=f"Run the {name} experiment")
        _add_common(scenario)
        if name in ("rank-analysis", "lift-check"):
            scenario.add_argument("--port-values", type=_counts, help="Comma separated port counts")
        if name == "lift-check":
            scenario.add_argument("--photon-values", type=_counts, help="Comma separated photon counts")
    simulate = sub.add_parser("simulate", help="Write one measurement record and its true state")
    _add_common(simulate)
    simulate.add_argument("--theta", type=float, help="Coupling length for evanescent couplers")
    rec = sub.add_parser("recover", help="Recover a state from a measurement record")
    _add_base(rec)
    rec.add_argument("record", help="Measurement record JSON")
    rec.add_argument("--truth", help="True state JSON to score against")
    return parser


def _setup_logging(debug):
    if debug:
        tmp = tempfile.NamedTemporaryFile(suffix=".log", prefix="singleobs-", delete=False)
        tmp.close()
        logging.basicConfig(filename=tmp.name, format='%(asctime)s %(message)s', level=logging.DEBUG)
        print(f"Debug log: {tmp.name}", file=sys.stderr)
        return tmp.name
    logging.basicConfig(format='%(asctime)s %(message)s', level=logging.INFO)
    return None


def _spec(scenario, args):
    config = load_config(args.config) if args.config else {}
    if args.solver:
        config["recovery"] = dict(config.get("recovery", {}), solver=args.solver)
    return build_spec(scenario, config,
                      seed=args.seed, out=args.out, trials=args.trials, couplers=args.couplers, ranks=args.ranks,
                      photons=args.photons, original_ports=args.original_ports, ports=args.ports, mu=args.mu,
                      snr_db=args.snr_db, noise_model=args.noise_model, detector=args.detector,
                      coupler=args.coupler, workers=args.workers, port_values=getattr(args, "port_values", None),
                      photon_values=getattr(args, "photon_values", None))


def _read_json(path):
    try:
        with open(path) as f:
            return f.read()
    except OSError as err:
        raise ExperimentError(f"Cannot read {path}: {err}") from None


def _write_json(path, data):
    with open(path, "w") as f:
        json.dump(data, f, indent=2)
        f.write("\n")


def _run_experiment(args, logfile):
    spec = _spec(args.command, args)
    out_dir = spec.out or "results"
    result = RUNNERS[args.command](spec)
    if isinstance(result, dict):
        result = dict(result, logfile=logfile)
        os.makedirs(out_dir, exist_ok=True)
        _write_json(os.path.join(out_dir, f"{spec.scenario}.json"), result)
        print(json.dumps(result, indent=2))
        return 0 if result["passed"] else 1
    csv_path, json_path = result.write(out_dir, logfile)
    if isinstance(result, SweepResult):
        for agg in result.aggregates():
            print(f"{agg['scenario']} rank {agg['rank']}: fidelity {agg['mean_fidelity']:.4f} "
                  f"+/- {agg['std_fidelity']:.4f} ({agg['n']} trials, {agg['failures']} failed)")
        for key, value in result.metadata.items():
            if not isinstance(value, list):
                print(f"{key}: {value}")
    else:
        for row in result.rows:
            print(f"M={row['M']} D={row['D']} {row['arm']}: mean rank {row['mean_rank']:.2f} "
                  f"(expected {row['expected']})")
    print(f"Wrote {csv_path} and {json_path}")
    return 0


def _simulate(args):
    spec = _spec("sweep", args)
    out_dir = spec.out or "results"
    setup = prepare_coupler(spec, 0, theta=args.theta)
    rho_0, record = simulate_instance(spec, setup=setup)
    os.makedirs(out_dir, exist_ok=True)
    record_path = os.path.join(out_dir, "record.json")
    state_path = os.path.join(out_dir, "state.json")
    with open(record_path, "w") as f:
        f.write(record.to_json() + "\n")
    _write_json(state_path, rho_0.to_dict())
    print(f"Wrote {record_path} ({record.values.size} outcomes) and {state_path}")
    return 0


def _recover(args):
    record = MeasurementRecord.from_json(_read_json(args.record))
    config = load_config(args.config).get("recovery", {}) if args.config else {}
    if args.solver:
        config = dict(config, solver=args.solver)
    cfg = RecoveryConfig.from_dict(config)
    theta = 1.0 if record.theta is None else record.theta
    u = make_coupler(record.coupler_family, record.ports, seed=record.coupler_seed, theta=theta,
                     m=record.original_ports)
    a_mat = build_measurement_matrix(u, record.original_ports, record.photons, mode=record.mode)
    result = recover(record, a_mat, cfg)
    data = result.to_dict()
    if args.truth:
        truth = DensityMatrix.from_dict(json.loads(_read_json(args.truth)))
        data["fidelity"] = fidelity(truth, result.rho_rec)
        print(f"Fidelity {data['fidelity']:.4f}")
    out_dir = args.out or "results"
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "recovery.json")
    _write_json(path, data)
    print(f"Residual {result.residual:.3e}, converged {result.converged}; wrote {path}")
    return 0


def main(argv=None):
    """Run the command line interface

    :param argv: Arguments, sys.argv[1:] when None
    :return: Exit code, 0 on success, 1 when the lifting check fails, 2 on a usage or config error
    :rtype: int
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return 0 if err.code == 0 else 2
    logfile = _setup_logging(args.debug)
    try:
        if args.command == "simulate":
            return _simulate(args)
        if args.command == "recover":
            return _recover(args)
        return _run_experiment(args, logfile)
    except USAGE_ERRORS as err:
        print(f"Error: {err}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as err:
        print(f"Error: {err}", file=sys.stderr)
        return 2
