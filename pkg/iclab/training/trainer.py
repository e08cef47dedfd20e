"""The training loop.

One epoch shuffles the training split (seeded), optionally augments every
batch, runs the network in training mode, takes one optimizer step per
batch and then evaluates the test split in inference mode.

A non-finite loss aborts the run with :class:`TrainingDivergedError`. The
error carries a diagnostic dump (epoch, batch, parameter norms) that is also
written to ``divergence.json`` when the run has an output directory.
"""
import math
import os.path as osp
import time
from dataclasses import dataclass, field

import numpy as np

import iclab.training.utils as u
from iclab import error
from iclab.core.rng import Rng
from iclab.layers import softmax_cross_entropy, accuracy, save_checkpoint
from iclab.reporting import write_json, make_output_dir
from iclab.resnet import build, parameter_count
from iclab.training.augment import augment
from iclab.training.config import dump_config
from iclab.training.data import prepare_data
from iclab.training.metrics import (
    EpochRecord, stability_metric, write_metrics_csv, write_timing_csv
)
from iclab.training.optim import make_optimizer, LearningRateSchedule

STABILITY_WINDOW = 5


def make_summary_writer(log_dir):
    """TensorBoard ``SummaryWriter`` writing into ``log_dir``."""
    try:
        from torch.utils.tensorboard import SummaryWriter
    except ImportError as e:
        raise error.DependencyNotInstalled(
            f"{e}. (HINT: you can install tensorboard dependencies by running "
            "'pip install iclab[tensorboard]'.)"
        )
    return SummaryWriter(log_dir)


@dataclass
class TrainResult:
    records: list
    network: object = field(repr=False)
    checkpoint_path: str = None
    output_dir: str = None

    @property
    def final(self):
        return self.records[-1]


class Trainer:
    """Trains the network described by a :class:`RunConfig`.

    Parameters
    ----------
    config : RunConfig
        validated run configuration
    output_dir : str, optional
        where metrics, report, config and checkpoint are written, nothing is
        written if None (default=None)
    verbose : bool, optional
        print progress, ``config.verbose`` if None (default=None)
    """

    def __init__(self, config, output_dir=None, verbose=None):
        self.config = config
        self.output_dir = output_dir
        self.verbose = config.verbose if verbose is None else verbose

        rng = Rng(config.seed)
        data_rng, init_rng, self.shuffle_rng, self.augment_rng = rng.spawn(4)
        self.train_data, self.test_data = prepare_data(config, data_rng)
        channels, height, _ = self.train_data.image_shape
        self.spec = config.net_spec(in_channels=channels, image_size=height)
        self.network = build(self.spec, init_rng)
        self.params = self.network.parameters()
        self.optimizer = make_optimizer(config.optimizer, self.params,
                                        config.momentum)
        self.schedule = LearningRateSchedule(config.lr, config.lr_milestones)
        self.writer = None
        if config.tensorboard and output_dir is not None:
            self.writer = make_summary_writer(osp.join(output_dir, "tb"))

        if self.verbose:
            config.display()
            print(f"\nNetwork: depth={self.spec.depth} "
                  f"params={parameter_count(self.network)} "
                  f"train={len(self.train_data)} test={len(self.test_data)}")

    def train(self):
        """Run every epoch and persist the results.

        Returns
        -------
        TrainResult

        Raises
        ------
        TrainingDivergedError
            if the training loss becomes non-finite
        """
        records = []
        if self.verbose:
            print("\nStarting training")
        for epoch in range(self.config.epochs):
            records.append(self.run_epoch(epoch))
            if self.writer is not None:
                self._log_scalars(records[-1])
            if self.verbose:
                self._print_record(records[-1])
        if self.writer is not None:
            self.writer.close()

        checkpoint_path = None
        if self.output_dir is not None:
            checkpoint_path = self.save(records)
        if self.verbose:
            print("Training complete")
        return TrainResult(records, self.network, checkpoint_path,
                           self.output_dir)

    def run_epoch(self, epoch):
        start = time.perf_counter()
        lr = self.schedule(epoch)
        order = self.shuffle_rng.permutation(len(self.train_data))
        loss_sum, correct, seen = 0.0, 0.0, 0
        for batch_num, (x, y) in enumerate(
                self.train_data.batches(self.config.batch_size, order)):
            if len(y) < 2:
                # BatchNorm needs two samples, drop a trailing singleton
                continue
            if self.config.augment:
                x = augment(x, self.augment_rng)
            logits = self.network.forward(x, training=True)
            loss, grad = softmax_cross_entropy(logits, y)
            if not math.isfinite(loss):
                self._diverged(epoch, batch_num, loss)
            _, grads = self.network.backward(grad)
            self.optimizer.step(grads, lr)
            loss_sum += loss * len(y)
            correct += accuracy(logits, y) * len(y)
            seen += len(y)
        test_loss, test_acc = self.evaluate(self.test_data)
        return EpochRecord(epoch=epoch,
                           train_loss=loss_sum / seen,
                           train_acc=correct / seen,
                           test_loss=test_loss,
                           test_acc=test_acc,
                           wall_ms=int((time.perf_counter() - start) * 1000),
                           lr=lr)

    def evaluate(self, dataset):
        """Mean loss and accuracy in inference mode."""
        loss_sum, correct = 0.0, 0.0
        for x, y in dataset.batches(self.config.eval_batch_size):
            logits = self.network.forward(x, training=False)
            loss, _ = softmax_cross_entropy(logits, y)
            loss_sum += loss * len(y)
            correct += accuracy(logits, y) * len(y)
        return loss_sum / len(dataset), correct / len(dataset)

    def parameter_norms(self):
        return {k: float(np.linalg.norm(p)) for k, p in self.params.items()}

    def _diverged(self, epoch, batch_num, loss):
        dump = {"epoch": epoch,
                "batch": batch_num,
                "loss": loss,
                "lr": self.schedule(epoch),
                "parameter_norms": self.parameter_norms()}
        if self.output_dir is not None:
            write_json(dump, osp.join(self.output_dir, u.DIVERGENCE_FILE))
        raise error.TrainingDivergedError(
            f"non-finite training loss {loss} at epoch {epoch}, batch "
            f"{batch_num}",
            dump
        )

    def save(self, records):
        out = self.output_dir
        write_metrics_csv(records, osp.join(out, u.METRICS_FILE))
        write_timing_csv(records, osp.join(out, u.TIMING_FILE))
        dump_config(self.config, osp.join(out, u.CONFIG_FILE))
        checkpoint_path = None
        if self.config.checkpoint:
            checkpoint_path = save_checkpoint(
                self.network,
                osp.join(out, u.CHECKPOINT_FILE),
                metadata={"name": self.config.name,
                          "seed": self.config.seed,
                          "epochs": len(records),
                          "spec": self.spec.to_dict()}
            )
        write_json(self.report(records), osp.join(out, u.REPORT_FILE))
        return checkpoint_path

    def report(self, records):
        stability = None
        if len(records) >= STABILITY_WINDOW:
            stability = stability_metric(records, STABILITY_WINDOW)
        return {"name": self.config.name,
                "config": self.config.to_dict(),
                "depth": self.spec.depth,
                "parameter_count": parameter_count(self.network),
                "final_train_acc": records[-1].train_acc,
                "final_test_acc": records[-1].test_acc,
                "stability_window": STABILITY_WINDOW,
                "stability": stability,
                "records": [r.to_dict() for r in records]}

    def _log_scalars(self, record):
        for key in ("train_loss", "train_acc", "test_loss", "test_acc", "lr"):
            self.writer.add_scalar(key, getattr(record, key), record.epoch)

    def _print_record(self, record):
        print(f"\nEpoch {record.epoch}:")
        print(f"\tlr = {record.lr:.3g}")
        print(f"\ttrain loss = {record.train_loss:.4f} "
              f"acc = {record.train_acc:.4f}")
        print(f"\ttest loss = {record.test_loss:.4f} "
              f"acc = {record.test_acc:.4f}")
        print(f"\twall = {record.wall_ms} ms")


def train(config, output_dir=None, verbose=None):
    """Train according to ``config``.

    When ``output_dir`` is None the directory is taken from ``IC_LAB_OUT``
    or ``config.output_dir``, with a subdirectory named after the config.
    Pass ``output_dir=False`` to write nothing.

    Returns
    -------
    TrainResult
    """
    if output_dir is None:
        output_dir = make_output_dir(config.output_dir, config.name)
    elif output_dir is False:
        output_dir = None
    return Trainer(config, output_dir, verbose).train()
