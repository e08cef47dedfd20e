"""This script plots test accuracy against epoch for one or more runs.

Usage
-----
$ iclab plot RUN_DIR_OR_METRICS_CSV ... [-l --labels LABEL ...]
     [-o --output figure.png]

"""
import os.path as osp

import matplotlib.pyplot as plt

import iclab.training.utils as u
from iclab.training import read_metrics_csv


def metrics_path(path):
    """Metrics file of a run directory, or ``path`` itself."""
    if osp.isdir(path):
        return osp.join(path, u.METRICS_FILE)
    return path


def plot_curves(paths, labels=None, output=None, metric="test_acc"):
    """Plot ``metric`` per epoch of every run in one figure.

    Parameters
    ----------
    paths : list[str]
        run directories or metrics.csv files
    labels : list[str], optional
        legend labels, file names if None (default=None)
    output : str, optional
        save the figure here instead of showing it (default=None)
    metric : str, optional
        EpochRecord field to plot (default="test_acc")
    """
    if labels is None:
        labels = [u.get_file_name(osp.normpath(p)) if osp.isdir(p)
                  else osp.basename(osp.dirname(osp.abspath(p)))
                  for p in paths]
    fig, ax = plt.subplots(figsize=(8, 5))
    for path, label in zip(paths, labels):
        records = read_metrics_csv(metrics_path(path))
        ax.plot([r.epoch for r in records],
                [getattr(r, metric) for r in records],
                label=label)
    ax.set_xlabel("epoch")
    ax.set_ylabel(metric.replace("_", " "))
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    if output is not None:
        fig.savefig(output)
        plt.close(fig)
    else:
        plt.show()
    return output
