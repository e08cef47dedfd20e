"""This script trains one run config under several unit layouts and seeds.

For every layout the mean (+/- stdev) final test accuracy and stability
metric over seeds are reported in a table to stdout and written to CSV. The
per-seed comparison of the IC v1 layout against the baseline counts the
seeds in which v1 trained at least as stably.

Usage
-----
$ iclab sweep CONFIG [-n --num_cpus NUM_CPUS] [-s --num_seeds NUM_SEEDS]
     [-l --layouts LAYOUT ...] [-w --window WINDOW]

"""
import os
import os.path as osp
import multiprocessing as mp

import numpy as np
from prettytable import PrettyTable

from iclab import error
from iclab.resnet import UnitLayout
from iclab.training import ConfigLoader, stability_metric, train
from iclab.reporting import write_csv

DEFAULT_LAYOUTS = [str(layout) for layout in UnitLayout]
# fraction of seeds in which v1 must be at least as stable as the baseline
STABLE_FRACTION = 0.7
# how far the mean final test accuracy of v1 may fall below the baseline
ACCURACY_SLACK = 0.01


def print_msg(msg):
    print(f"[PID={os.getpid()}] {msg}")


class Result:

    def __init__(self, name):
        self.name = name
        self.run_test_acc = []
        self.run_stability = []
        self.num_diverged = 0

    def add(self, test_acc, stability, diverged=False):
        if diverged:
            self.num_diverged += 1
            return
        self.run_test_acc.append(test_acc)
        self.run_stability.append(stability)

    def summarize(self):
        if not self.run_test_acc:
            return np.nan, np.nan, np.nan, np.nan
        acc_mean = np.mean(self.run_test_acc)
        acc_std = np.std(self.run_test_acc)
        stab_mean = np.mean(self.run_stability)
        stab_std = np.std(self.run_stability)
        return acc_mean, acc_std, stab_mean, stab_std

    def get_formatted_summary(self):
        acc_mean, acc_std, stab_mean, stab_std = self.summarize()
        return (
            f"{acc_mean:.4f} +/- {acc_std:.4f}",
            f"{stab_mean:.4f} +/- {stab_std:.4f}",
            str(self.num_diverged)
        )


def run_config(args):
    config_dict, name, layout, seed, window, output_dir = args
    print_msg(f"Running '{name}' with layout={layout} seed={seed}")
    config_dict = dict(config_dict, layout=layout, seed=seed, verbose=False)
    config = ConfigLoader().parse(config_dict, name=f"{name}-{layout}-{seed}")
    run_dir = osp.join(output_dir, config.name)
    os.makedirs(run_dir, exist_ok=True)
    try:
        result = train(config, output_dir=run_dir, verbose=False)
    except error.TrainingDivergedError as e:
        print_msg(f"'{config.name}' diverged: {e}")
        return {
            "Layout": layout,
            "Seed": seed,
            "Final train acc": float("nan"),
            "Final test acc": float("nan"),
            "Stability": float("nan"),
            "Diverged": True,
        }
    return {
        "Layout": layout,
        "Seed": seed,
        "Final train acc": result.final.train_acc,
        "Final test acc": result.final.test_acc,
        "Stability": stability_metric(result.records, window),
        "Diverged": False,
    }


def collate_results(results):
    layout_results = {}
    for res in results:
        name = res["Layout"]
        if name not in layout_results:
            layout_results[name] = Result(name)
        layout_results[name].add(res["Final test acc"],
                                 res["Stability"],
                                 res["Diverged"])
    return layout_results


def compare_to_baseline(results, layout="v1"):
    """Per-seed stability comparison of ``layout`` against the baseline.

    Returns
    -------
    dict
        number of seeds compared, in how many ``layout`` was at least as
        stable and the mean final test accuracies, None if either layout is
        missing. Seeds where either run diverged are left out.
    """
    results = [r for r in results if not r["Diverged"]]
    by_key = {(r["Layout"], r["Seed"]): r["Stability"] for r in results}
    acc = {(r["Layout"], r["Seed"]): r["Final test acc"] for r in results}
    seeds = sorted({r["Seed"] for r in results
                    if (layout, r["Seed"]) in by_key
                    and ("baseline", r["Seed"]) in by_key})
    if not seeds:
        return None
    wins = sum(by_key[(layout, s)] <= by_key[("baseline", s)] for s in seeds)
    acc_layout = float(np.mean([acc[(layout, s)] for s in seeds]))
    acc_baseline = float(np.mean([acc[("baseline", s)] for s in seeds]))
    stable = wins >= STABLE_FRACTION * len(seeds)
    accurate = acc_layout >= acc_baseline - ACCURACY_SLACK
    return {"layout": layout,
            "seeds": len(seeds),
            "at_least_as_stable": int(wins),
            "mean_test_acc": acc_layout,
            "baseline_mean_test_acc": acc_baseline,
            "passed": bool(stable and accurate)}


def output_results(results, layouts, output=None):
    headers = ["Layout", "Final test acc", "Stability", "Diverged"]
    rows = []
    for name in layouts:
        rows.append([name, *results[name].get_formatted_summary()])

    table = PrettyTable(headers)
    for row in rows:
        table.add_row(row)

    print(table)

    if output is not None:
        with open(output, "w") as fout:
            fout.write(",".join(headers) + "\n")
            for row in rows:
                fout.write(",".join(row) + "\n")


def run_sweep(config_dict,
              name,
              output_dir,
              num_cpus=1,
              num_seeds=10,
              layouts=None,
              window=5):
    """Train every layout with seeds ``0 .. num_seeds - 1``.

    Returns
    -------
    results : list[dict]
        one row per run
    comparison : dict or None
        v1 against baseline, see :func:`compare_to_baseline`
    """
    layouts = DEFAULT_LAYOUTS if layouts is None else layouts
    run_args_list = []
    for layout in layouts:
        for seed in range(num_seeds):
            run_args_list.append(
                (config_dict, name, layout, seed, window, output_dir)
            )

    if num_cpus > 1:
        with mp.Pool(num_cpus) as p:
            results = p.map(run_config, run_args_list)
    else:
        results = [run_config(args) for args in run_args_list]

    write_csv(results, osp.join(output_dir, "runs.csv"))
    output_results(collate_results(results), layouts,
                   osp.join(output_dir, "summary.csv"))
    return results, compare_to_baseline(results)
