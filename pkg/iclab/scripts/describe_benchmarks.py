"""This script will output description statistics of all benchmark run
configs.

It will output a table to stdout (and optionally to a .csv file) which
contains the following headers:

- Name : the benchmark config name
- Data : data format of the config
- Needs data : whether the dataset must be downloaded first
- Layout : residual unit layout
- Form : plain or bottleneck units
- n : residual units per stage
- Depth : stacked weight layers (6n+2 or 9n+2)
- Weighted : weight layers counted in the built network
- Params : learnable parameters of the built network
- Baseline params : learnable parameters of the baseline at equal depth
- Epochs : number of training epochs

Usage
-----

$ iclab describe [-o --output filename.csv]

"""
import prettytable

import iclab.training.utils as u
from iclab.configs.benchmark import AVAIL_BENCHMARKS
from iclab.resnet import NetSpec, build, parameter_count, weighted_layer_count

HEADERS = ["Name", "Data", "Needs data", "Layout", "Form", "n", "Depth",
           "Weighted", "Params", "Baseline params", "Epochs"]


def benchmark_spec(name, **overrides):
    """Network spec of a benchmark config, read without checking its data
    paths."""
    d = u.load_yaml(AVAIL_BENCHMARKS[name]["file"])
    keys = {u.N: d[u.N],
            u.LAYOUT: d[u.LAYOUT],
            u.BOTTLENECK: d.get(u.BOTTLENECK, False),
            u.NUM_CLASSES: d.get(u.NUM_CLASSES, 10)}
    if u.IMAGE_SIZE in d:
        keys[u.IMAGE_SIZE] = d[u.IMAGE_SIZE]
    keys.update(overrides)
    return NetSpec.from_dict(keys), d


def get_description(name):
    spec, d = benchmark_spec(name)
    needs_data = AVAIL_BENCHMARKS[name]["requires_data"]
    network = build(spec)
    baseline = build(benchmark_spec(name, layout="baseline")[0])
    return {
        "Name": name,
        "Data": d[u.DATA_FORMAT],
        "Needs data": "yes" if needs_data else "no",
        "Layout": str(spec.layout),
        "Form": "bottleneck" if spec.bottleneck else "plain",
        "n": spec.n,
        "Depth": spec.depth,
        "Weighted": weighted_layer_count(network),
        "Params": parameter_count(network),
        "Baseline params": parameter_count(baseline),
        "Epochs": d[u.EPOCHS],
    }


def describe_benchmarks(output=None, names=None):
    names = list(AVAIL_BENCHMARKS) if names is None else names
    rows = []
    for name in names:
        des = get_description(name)
        rows.append([str(des[h]) for h in HEADERS])

    table = prettytable.PrettyTable(HEADERS)
    for row in rows:
        table.add_row(row)

    print(table)

    if output is not None:
        print(f"\nSaving to {output}")
        with open(output, "w") as fout:
            fout.write(",".join(HEADERS) + "\n")
            for row in rows:
                fout.write(",".join(row) + "\n")
    return rows
