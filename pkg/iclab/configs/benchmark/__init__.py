import os.path as osp

BENCHMARK_DIR = osp.dirname(osp.abspath(__file__))

AVAIL_BENCHMARKS = {
    "synthetic-v1": {
        "file": osp.join(BENCHMARK_DIR, "synthetic-v1.yaml"),
        "requires_data": False,
        "min_train_acc": 0.95
    },
    "synthetic-baseline": {
        "file": osp.join(BENCHMARK_DIR, "synthetic-baseline.yaml"),
        "requires_data": False,
        "min_train_acc": 0.95
    },
    "synthetic-desk": {
        "file": osp.join(BENCHMARK_DIR, "synthetic-desk.yaml"),
        "requires_data": False,
        "min_train_acc": None
    },
    "arch-n2-v1": {
        "file": osp.join(BENCHMARK_DIR, "arch-n2-v1.yaml"),
        "requires_data": False,
        "min_train_acc": None
    },
    "arch-n2-v1-bottleneck": {
        "file": osp.join(BENCHMARK_DIR, "arch-n2-v1-bottleneck.yaml"),
        "requires_data": False,
        "min_train_acc": None
    },
    "cifar10-desk": {
        "file": osp.join(BENCHMARK_DIR, "cifar10-desk.yaml"),
        "requires_data": True,
        "min_train_acc": None
    },
    "cifar10-full": {
        "file": osp.join(BENCHMARK_DIR, "cifar10-full.yaml"),
        "requires_data": True,
        "min_train_acc": None
    },
}
