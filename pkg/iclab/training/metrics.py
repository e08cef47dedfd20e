"""Per-epoch training records and the stability metric."""
from dataclasses import dataclass, asdict

import numpy as np

from iclab import error
from iclab.reporting import write_csv, read_csv

# wall time is kept out of the metrics file so equal seeds give equal files
METRIC_COLUMNS = ("epoch", "lr", "train_loss", "train_acc",
                  "test_loss", "test_acc")
TIMING_COLUMNS = ("epoch", "wall_ms")


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    train_acc: float
    test_loss: float
    test_acc: float
    wall_ms: int = 0
    lr: float = float("nan")

    def __post_init__(self):
        assert 0 <= self.train_acc <= 1 and 0 <= self.test_acc <= 1, \
            "accuracies must be in [0, 1]"

    def to_dict(self):
        return asdict(self)


def stability_metric(records, window):
    """Mean over sliding windows of the test-accuracy standard deviation.

    Windows of ``window`` consecutive epochs advance one epoch at a time.
    The population standard deviation is used, so an accuracy curve
    alternating between ``a - 0.1`` and ``a + 0.1`` scores 0.1 with
    ``window=2``. Lower is more stable.

    Parameters
    ----------
    records : list[EpochRecord] or list[float]
        epoch records or test accuracies
    window : int
        window length, at least 2

    Raises
    ------
    ParameterError
        if ``window < 2``
    PreconditionError
        if there are fewer records than ``window``
    """
    if window < 2:
        raise error.ParameterError(f"window must be >= 2: {window}")
    acc = np.array([r.test_acc if isinstance(r, EpochRecord) else r
                    for r in records], dtype=np.float64)
    if len(acc) < window:
        raise error.PreconditionError(
            f"stability metric needs at least {window} epochs, "
            f"got {len(acc)}"
        )
    windows = np.lib.stride_tricks.sliding_window_view(acc, window)
    return float(windows.std(axis=1).mean())


def write_metrics_csv(records, file_path):
    return write_csv([r.to_dict() for r in records], file_path,
                     METRIC_COLUMNS)


def write_timing_csv(records, file_path):
    return write_csv([r.to_dict() for r in records], file_path,
                     TIMING_COLUMNS)


def read_metrics_csv(file_path):
    """Read a metrics file back into :class:`EpochRecord` objects (with
    ``wall_ms`` 0)."""
    records = []
    for row in read_csv(file_path):
        records.append(EpochRecord(epoch=int(row["epoch"]),
                                   train_loss=float(row["train_loss"]),
                                   train_acc=float(row["train_acc"]),
                                   test_loss=float(row["test_loss"]),
                                   test_acc=float(row["test_acc"]),
                                   lr=float(row["lr"])))
    return records
