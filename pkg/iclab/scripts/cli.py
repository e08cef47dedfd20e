"""The ``iclab`` command line.

Every subcommand writes ``report.json`` and a flat CSV into its output
directory and prints a one-line PASS/FAIL summary.

Exit codes
----------
0 : every check passed
1 : a check failed (or training diverged)
2 : usage or configuration error

Usage
-----
$ iclab train CONFIG [--output-dir DIR] [--verbose]
$ iclab verify-theorem1 [--p P ...] [--trials N] [--seed S]
$ iclab verify-correlation [--p P ...] [--c C ...] [--samples N] [--seed S]
$ iclab diagnose-zigzag CONFIG
$ iclab whiten-race [--kappa K] [--dim D] [--tol T] [--lr-scale S]
$ iclab arch-dump CONFIG
$ iclab sweep CONFIG [-n NUM_CPUS] [-s NUM_SEEDS] [-l LAYOUT ...]
$ iclab plot RUN ... [-l LABEL ...] [-o FIGURE]
$ iclab describe [-o CSV]

CONFIG is the path of a .yaml run config or the name of a bundled benchmark
config (see ``iclab describe``).
"""
import argparse
import os.path as osp
import sys

import iclab.training.utils as u
from iclab import error
from iclab.configs.benchmark import AVAIL_BENCHMARKS
from iclab.convergence import (
    IC_FED, LR_INVERSE_LAMBDA_MAX, RELU_FED, coherence_probability,
    head_sign_coherence, linreg_gd_race, zigzag_trials
)
from iclab.core.rng import Rng
from iclab.infotheory import (
    correlation_scaling_check, random_joint, verify_theorem1
)
from iclab.reporting import (
    make_output_dir, summary_line, write_csv, write_json
)
from iclab.resnet import architecture_summary, build
from iclab.training import load_config, train

SUCCESS = 0
CHECK_FAILED = 1
USAGE_ERROR = 2

# errors that mean the command itself was wrong, not the checked claim
USAGE_ERRORS = (
    error.ConfigError,
    error.UsageError,
    error.SpecError,
    error.FormatError,
    error.ParameterError,
    error.DependencyNotInstalled,
    NotImplementedError,
)

THEOREM_P = [0.05, 0.25, 0.5, 0.75, 0.95]
CORRELATION_P = [0.5, 0.95]
CORRELATION_C = [0.0, 0.3, 0.8]
HEAD_BATCH_SIZE = 8
ZIGZAG_TRIALS = 10000
ZIGZAG_SIGMA = 3.0


def resolve_config(config):
    """Load a run config given by path or bundled benchmark name."""
    if not osp.exists(config) and config in AVAIL_BENCHMARKS:
        return load_config(AVAIL_BENCHMARKS[config]["file"], name=config)
    return load_config(config)


def output_dir_for(args, config=None):
    base = args.output_dir
    if base is None and config is not None:
        base = config.output_dir
    return make_output_dir(base, args.command)


def finish(args, passed, detail=""):
    print(summary_line(args.command, passed, detail))
    return SUCCESS if passed else CHECK_FAILED


def cmd_train(args):
    config = resolve_config(args.config)
    out = make_output_dir(args.output_dir or config.output_dir, config.name)
    verbose = True if args.verbose else None
    try:
        result = train(config, output_dir=out, verbose=verbose)
    except error.TrainingDivergedError as e:
        return finish(args, False, f"{e}, dump written to {out}")

    final = result.final
    passed = True
    min_acc = AVAIL_BENCHMARKS.get(config.name, {}).get("min_train_acc")
    if min_acc is not None:
        passed = final.train_acc >= min_acc
    return finish(
        args, passed,
        f"train_acc={final.train_acc:.4f} test_acc={final.test_acc:.4f} "
        f"output={out}"
    )


def cmd_verify_theorem1(args):
    if args.trials < 1:
        raise error.ParameterError(f"--trials must be >= 1: {args.trials}")
    rng = Rng(args.seed)
    records = []
    for trial, trial_rng in enumerate(rng.spawn(args.trials)):
        joint = random_joint(trial_rng, args.nx, args.ny)
        for p in args.p:
            report = verify_theorem1(joint, p, args.tolerance)
            records.append({"trial": trial, **report.to_dict()})

    out = output_dir_for(args)
    write_json({"seed": args.seed,
                "trials": args.trials,
                "nx": args.nx,
                "ny": args.ny,
                "records": records},
               osp.join(out, u.REPORT_FILE))
    write_csv(records, osp.join(out, "theorem1.csv"))
    n_pass = sum(r["pass"] for r in records)
    worst = max(max(r["mi_residual"], r["entropy_residual"])
                for r in records)
    return finish(args, n_pass == len(records),
                  f"{n_pass}/{len(records)} records, "
                  f"max residual {worst:.3g}")


def cmd_verify_correlation(args):
    rng = Rng(args.seed)
    records = []
    for p, p_rng in zip(args.p, rng.spawn(len(args.p))):
        for c, c_rng in zip(args.c, p_rng.spawn(len(args.c))):
            report = correlation_scaling_check(c_rng, p, args.samples, c)
            records.append({**report.to_dict(),
                            "pass": report.within(args.sigma)})

    out = output_dir_for(args)
    write_json({"seed": args.seed, "sigma": args.sigma, "records": records},
               osp.join(out, u.REPORT_FILE))
    write_csv(records, osp.join(out, "correlation.csv"))
    n_pass = sum(r["pass"] for r in records)
    return finish(args, n_pass == len(records),
                  f"{n_pass}/{len(records)} within {args.sigma:g} sigma")


def cmd_diagnose_zigzag(args):
    config = resolve_config(args.config)
    rng = Rng(config.seed)
    relu_rng, ic_rng, prob_rng, head_rng = rng.spawn(4)
    p_keep = 1.0 - config.drop_rate
    width = config.zigzag_width

    relu = zigzag_trials(relu_rng, RELU_FED, width, config.zigzag_nets,
                         p_keep=p_keep)
    ic = zigzag_trials(ic_rng, IC_FED, width, config.zigzag_nets,
                       p_keep=p_keep)
    rows = [dict(relu.to_dict(), check="coherence == 1",
                 passed=relu.min_coherence == 1.0),
            dict(ic.to_dict(), check="mean coherence < 0.5",
                 passed=ic.mean_coherence < 0.5)]

    probabilities = []
    for n in sorted({1, 2, 4, width}):
        report = coherence_probability(prob_rng, n, ZIGZAG_TRIALS)
        probabilities.append(dict(report.to_dict(),
                                  passed=report.within(ZIGZAG_SIGMA)))

    network = build(config.net_spec(in_channels=_in_channels(config)),
                    head_rng)
    x = head_rng.normal(0.0, 1.0, network.input_shape(HEAD_BATCH_SIZE))
    labels = head_rng.integers(0, config.num_classes, HEAD_BATCH_SIZE)
    head = head_sign_coherence(network, network.head, x, labels)

    out = output_dir_for(args, config)
    write_json({"config": config.name,
                "feeds": rows,
                "coherence_probability": probabilities,
                "resnet_head": head.to_dict()},
               osp.join(out, u.REPORT_FILE))
    write_csv(rows + probabilities, osp.join(out, "zigzag.csv"),
              columns=["feed", "check", "width", "n_nets",
                       "mean_coherence", "min_coherence", "max_coherence",
                       "n", "trials", "measured", "expected", "std_error",
                       "residual", "passed"])
    passed = all(r["passed"] for r in rows + probabilities)
    return finish(args, passed,
                  f"relu={relu.mean_coherence:.3f} ic={ic.mean_coherence:.3f}"
                  f" resnet_head={head.coherent_fraction:.3f}")


def cmd_whiten_race(args):
    lr_rule = LR_INVERSE_LAMBDA_MAX if args.lr_scale is None \
        else args.lr_scale
    out = output_dir_for(args)
    try:
        race = linreg_gd_race(Rng(args.seed), args.dim, args.kappa, args.tol,
                              lr_rule=lr_rule, max_iters=args.max_iters)
    except error.DivergenceError as e:
        write_json({"diverged": str(e)}, osp.join(out, u.REPORT_FILE))
        return finish(args, False, str(e))

    w, c = race.whitened, race.correlated
    write_json({"seed": args.seed,
                "dim": args.dim,
                "kappa_target": args.kappa,
                "tol": args.tol,
                "iteration_ratio": race.iteration_ratio,
                "reports": [r.to_dict() for r in race.reports]},
               osp.join(out, u.REPORT_FILE))
    write_csv([r.to_dict() for r in race.reports],
              osp.join(out, "race.csv"))
    steps = max(len(w.loss_history), len(c.loss_history))
    write_csv([{"iteration": i,
                "whitened": _at(w.loss_history, i),
                "correlated": _at(c.loss_history, i)}
               for i in range(steps)],
              osp.join(out, "loss_history.csv"))
    passed = w.converged and c.converged \
        and w.iterations_to_tol <= c.iterations_to_tol
    return finish(args, passed,
                  f"whitened={w.iterations_to_tol} "
                  f"correlated={c.iterations_to_tol} "
                  f"ratio={race.iteration_ratio:.1f}")


def cmd_arch_dump(args):
    config = resolve_config(args.config)
    network = build(config.net_spec(in_channels=_in_channels(config)),
                    Rng(config.seed))
    summary = architecture_summary(network)
    out = output_dir_for(args, config)
    write_json(summary, osp.join(out, u.REPORT_FILE))
    write_csv(summary["layers"], osp.join(out, "layers.csv"))
    passed = summary["weighted_layer_count"] == summary["depth"]
    return finish(args, passed,
                  f"depth={summary['depth']} "
                  f"weighted={summary['weighted_layer_count']} "
                  f"params={summary['parameter_count']}")


def cmd_sweep(args):
    from iclab.scripts.run_sweep import run_sweep

    config = resolve_config(args.config)
    out = output_dir_for(args, config)
    results, comparison = run_sweep(config.to_dict(),
                                    config.name,
                                    out,
                                    num_cpus=args.num_cpus,
                                    num_seeds=args.num_seeds,
                                    layouts=args.layouts,
                                    window=args.window)
    write_json({"config": config.name,
                "window": args.window,
                "runs": results,
                "comparison": comparison},
               osp.join(out, u.REPORT_FILE))
    diverged = [f"{r['Layout']}-{r['Seed']}" for r in results
                if r["Diverged"]]
    if diverged:
        return finish(args, False, f"{len(diverged)}/{len(results)} runs "
                                   f"diverged: {' '.join(diverged)}")
    if comparison is None:
        return finish(args, True, f"{len(results)} runs, no v1/baseline pair")
    return finish(args, comparison["passed"],
                  f"v1 at least as stable in "
                  f"{comparison['at_least_as_stable']}/{comparison['seeds']}"
                  f" seeds")


def cmd_plot(args):
    from iclab.scripts.plot_curves import plot_curves

    out = output_dir_for(args)
    figure = args.output or osp.join(out, "curves.png")
    plot_curves(args.runs, args.labels, figure, args.metric)
    write_json({"runs": args.runs, "metric": args.metric, "figure": figure},
               osp.join(out, u.REPORT_FILE))
    write_csv([{"run": r} for r in args.runs], osp.join(out, "runs.csv"))
    return finish(args, True, figure)


def cmd_describe(args):
    from iclab.scripts.describe_benchmarks import HEADERS, describe_benchmarks

    out = output_dir_for(args)
    rows = describe_benchmarks(args.output)
    table = [dict(zip(HEADERS, row)) for row in rows]
    write_json({"benchmarks": table}, osp.join(out, u.REPORT_FILE))
    write_csv(table, osp.join(out, "benchmarks.csv"), columns=HEADERS)
    return finish(args, True, f"{len(rows)} benchmark configs")


def _in_channels(config):
    # IDX files hold single-channel images
    return 1 if config.data_format == u.IDX else 3


def _at(history, i):
    return history[i] if i < len(history) else None


def _float_list(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of floats: {text!r}")


def _flatten(lists):
    return [v for values in lists for v in values]


def make_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output-dir", type=str, default=None,
                        help=("Output directory, a subdirectory per command"
                              " is created. IC_LAB_OUT overrides it"
                              " (default: the config's output_dir or"
                              " ./results)"))

    parser = argparse.ArgumentParser(
        prog="iclab",
        description="Independent-Component layer experiments"
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    p = subparsers.add_parser("train", parents=[common],
                              help="Train a network from a run config")
    p.add_argument("config", type=str,
                   help="Path of a .yaml run config or benchmark name")
    p.add_argument("-v", "--verbose", action="store_true",
                   help="Print progress (default: the config's verbose)")
    p.set_defaults(func=cmd_train)

    p = subparsers.add_parser(
        "verify-theorem1", parents=[common],
        help="Exact MI decay and entropy checks on random discrete joints"
    )
    p.add_argument("--p", type=_float_list, action="append", default=None,
                   help=("Keep probabilities, comma separated or repeated"
                         f" (default={THEOREM_P})"))
    p.add_argument("--trials", type=int, default=100,
                   help="Random joints to check (default=100)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tolerance", type=float, default=1e-10,
                   help="Residual bound in bits (default=1e-10)")
    p.add_argument("--nx", type=int, default=3,
                   help="Nonzero support size of x (default=3)")
    p.add_argument("--ny", type=int, default=3,
                   help="Nonzero support size of y (default=3)")
    p.set_defaults(func=cmd_verify_theorem1, default_p=THEOREM_P)

    p = subparsers.add_parser(
        "verify-correlation", parents=[common],
        help="Monte-Carlo check that gating scales correlation by p"
    )
    p.add_argument("--p", type=_float_list, action="append", default=None,
                   help=("Keep probabilities, comma separated or repeated"
                         f" (default={CORRELATION_P})"))
    p.add_argument("--c", type=float, nargs="+", default=CORRELATION_C,
                   help=f"Planted correlations (default={CORRELATION_C})")
    p.add_argument("--samples", type=int, default=1000000,
                   help="Monte-Carlo samples, at least 100000 "
                        "(default=1000000)")
    p.add_argument("--sigma", type=float, default=3.0,
                   help="Allowed standard errors (default=3)")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify_correlation, default_p=CORRELATION_P)

    p = subparsers.add_parser(
        "diagnose-zigzag", parents=[common],
        help="Sign coherence of ReLU-fed and IC-fed head gradients"
    )
    p.add_argument("config", type=str,
                   help="Path of a .yaml run config or benchmark name")
    p.set_defaults(func=cmd_diagnose_zigzag)

    p = subparsers.add_parser(
        "whiten-race", parents=[common],
        help="Gradient descent on whitened against correlated inputs"
    )
    p.add_argument("--kappa", type=float, default=100.0,
                   help="Condition number of the correlated design "
                        "(default=100)")
    p.add_argument("--dim", type=int, default=8,
                   help="Input dimension (default=8)")
    p.add_argument("--tol", type=float, default=1e-8,
                   help="Loss threshold (default=1e-8)")
    p.add_argument("--lr-scale", type=float, default=None,
                   help="Step size as a multiple of 1/lambda_max "
                        "(default=1)")
    p.add_argument("--max-iters", type=int, default=100000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_whiten_race)

    p = subparsers.add_parser(
        "arch-dump", parents=[common],
        help="Architecture summary of the configured network"
    )
    p.add_argument("config", type=str,
                   help="Path of a .yaml run config or benchmark name")
    p.set_defaults(func=cmd_arch_dump)

    p = subparsers.add_parser(
        "sweep", parents=[common],
        help="Train every unit layout over several seeds"
    )
    p.add_argument("config", type=str,
                   help="Path of a .yaml run config or benchmark name")
    p.add_argument("-n", "--num_cpus", type=int, default=1,
                   help="Number of CPUS to use in parallel (default=1)")
    p.add_argument("-s", "--num_seeds", type=int, default=10,
                   help="Number of seeds to run for each layout (default=10)")
    p.add_argument("-l", "--layouts", type=str, nargs="+", default=None,
                   choices=["baseline", "v1", "v2", "v3"],
                   help="Unit layouts to train (default=all)")
    p.add_argument("-w", "--window", type=int, default=5,
                   help="Stability metric window (default=5)")
    p.set_defaults(func=cmd_sweep)

    p = subparsers.add_parser("plot", parents=[common],
                              help="Plot metric curves of finished runs")
    p.add_argument("runs", type=str, nargs="+",
                   help="Run directories or metrics.csv files")
    p.add_argument("-l", "--labels", type=str, nargs="+", default=None)
    p.add_argument("-o", "--output", type=str, default=None,
                   help="Figure file (default: curves.png in output dir)")
    p.add_argument("-m", "--metric", type=str, default="test_acc",
                   choices=["train_loss", "train_acc", "test_loss",
                            "test_acc"])
    p.set_defaults(func=cmd_plot)

    p = subparsers.add_parser("describe", parents=[common],
                              help="Table of the bundled benchmark configs")
    p.add_argument("-o", "--output", type=str, default=None,
                   help="File name to output as CSV too")
    p.set_defaults(func=cmd_describe)
    return parser


def main(argv=None):
    """Run the ``iclab`` command line, returning the exit code."""
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code
    if hasattr(args, "default_p"):
        args.p = args.default_p if args.p is None else _flatten(args.p)
    if getattr(args, "labels", None) is not None \
            and len(args.labels) != len(args.runs):
        parser.print_usage(sys.stderr)
        print(f"iclab: error: {len(args.labels)} labels for "
              f"{len(args.runs)} runs", file=sys.stderr)
        return USAGE_ERROR

    try:
        return args.func(args)
    except USAGE_ERRORS as e:
        print(f"iclab {args.command}: error: {e}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
