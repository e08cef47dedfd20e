"""Image datasets.

Images are ``N x C x H x W`` float64 arrays scaled to [0, 1]. The per-pixel
mean of the training split is subtracted from both splits exactly once, see
:meth:`Dataset.centered`.

Supported sources:

- ``cifar10-binary``: records of one label byte followed by 3072 image bytes
  (R, G and B planes of 32x32), a path may be a single batch file or a
  directory, in which case its ``data_batch_*.bin`` files are read in name
  order
- ``idx``: an IDX image file (unsigned byte, ``N x H x W`` or
  ``N x C x H x W``) with its IDX label file next to it
  (``*-images-idx3-ubyte`` -> ``*-labels-idx1-ubyte``)
- ``synthetic``: seeded class-structured Gaussian blobs
"""
import os
import os.path as osp
import struct
from dataclasses import dataclass, replace

import numpy as np

from iclab import error
import iclab.training.utils as u

CIFAR_IMAGE_SHAPE = (3, 32, 32)
CIFAR_IMAGE_BYTES = 3 * 32 * 32
CIFAR_RECORD_BYTES = 1 + CIFAR_IMAGE_BYTES
CIFAR_NUM_CLASSES = 10

IDX_UBYTE = 0x08
IDX_HEADER = 4


@dataclass
class Dataset:
    """Images with integer labels.

    Attributes
    ----------
    images : ndarray
        ``N x C x H x W`` images
    labels : ndarray
        ``N`` class ids in ``[0, num_classes)``
    num_classes : int
        number of classes
    per_pixel_mean : ndarray or None
        ``C x H x W`` mean subtracted from ``images``, None while the images
        are still uncentered
    """

    images: np.ndarray
    labels: np.ndarray
    num_classes: int
    per_pixel_mean: np.ndarray = None

    def __post_init__(self):
        assert self.images.ndim == 4, \
            f"images must be N x C x H x W, got {self.images.shape}"
        assert len(self.images) == len(self.labels)
        if len(self.labels) and (self.labels.min() < 0
                                 or self.labels.max() >= self.num_classes):
            raise error.FormatError(
                f"labels must be in [0, {self.num_classes})"
            )

    def __len__(self):
        return len(self.labels)

    @property
    def image_shape(self):
        return self.images.shape[1:]

    @property
    def is_centered(self):
        return self.per_pixel_mean is not None

    def centered(self, mean=None):
        """Copy with the per-pixel mean subtracted.

        Parameters
        ----------
        mean : ndarray, optional
            mean to subtract, the mean of this dataset if None (use the
            training mean for the test split)

        Raises
        ------
        UsageError
            if the mean was already subtracted
        """
        if self.is_centered:
            raise error.UsageError("per-pixel mean already subtracted")
        if mean is None:
            mean = self.images.mean(axis=0)
        return replace(self, images=self.images - mean, per_pixel_mean=mean)

    def subset(self, indices):
        return replace(self,
                       images=self.images[indices],
                       labels=self.labels[indices])

    def batches(self, batch_size, order=None):
        """Iterate over ``(images, labels)`` batches in ``order``."""
        order = np.arange(len(self)) if order is None else order
        for start in range(0, len(order), batch_size):
            idx = order[start:start + batch_size]
            yield self.images[idx], self.labels[idx]


def stratified_subset(dataset, size, rng):
    """Seeded subset of ``size`` samples with the class proportions of
    ``dataset``.

    Class quotas are the floors of the proportional shares, the leftover
    samples go to the classes with the largest remainders.
    """
    if size >= len(dataset):
        return dataset
    classes, counts = np.unique(dataset.labels, return_counts=True)
    shares = size * counts / counts.sum()
    quotas = np.floor(shares).astype(int)
    leftover = size - quotas.sum()
    # stable sort keeps class order on ties
    for i in np.argsort(-(shares - quotas), kind="stable")[:leftover]:
        quotas[i] += 1
    picked = []
    for c, quota in zip(classes, quotas):
        idx = np.flatnonzero(dataset.labels == c)
        picked.append(idx[rng.permutation(len(idx))[:quota]])
    return dataset.subset(np.sort(np.concatenate(picked)))


def read_cifar10_binary(path):
    """Read a CIFAR-10 binary batch file or a directory of them.

    Returns
    -------
    Dataset
        uncentered images in [0, 1]
    """
    if osp.isdir(path):
        files = sorted(osp.join(path, f) for f in os.listdir(path)
                       if f.startswith("data_batch") and f.endswith(".bin"))
        if not files:
            raise error.ConfigError(f"no data_batch_*.bin files in {path}")
        parts = [read_cifar10_binary(f) for f in files]
        return Dataset(np.concatenate([p.images for p in parts]),
                       np.concatenate([p.labels for p in parts]),
                       CIFAR_NUM_CLASSES)

    with open(path, "rb") as fin:
        raw = np.frombuffer(fin.read(), dtype=np.uint8)
    if raw.size == 0 or raw.size % CIFAR_RECORD_BYTES:
        offset = raw.size - raw.size % CIFAR_RECORD_BYTES
        raise error.FormatError(
            f"{path}: truncated CIFAR-10 record, file size {raw.size} is not "
            f"a positive multiple of {CIFAR_RECORD_BYTES}",
            offset
        )
    records = raw.reshape(-1, CIFAR_RECORD_BYTES)
    labels = records[:, 0].astype(np.int64)
    bad = np.flatnonzero(labels >= CIFAR_NUM_CLASSES)
    if bad.size:
        raise error.FormatError(
            f"{path}: label {labels[bad[0]]} out of range",
            int(bad[0]) * CIFAR_RECORD_BYTES
        )
    images = records[:, 1:].reshape(-1, *CIFAR_IMAGE_SHAPE)
    return Dataset(images.astype(np.float64) / 255.0, labels,
                   CIFAR_NUM_CLASSES)


def read_idx(path):
    """Read an unsigned-byte IDX file.

    Returns
    -------
    ndarray
        the stored array with its header dimensions
    """
    with open(path, "rb") as fin:
        raw = fin.read()
    if len(raw) < IDX_HEADER:
        raise error.FormatError(f"{path}: missing IDX header", len(raw))
    zero, dtype_code, ndim = struct.unpack(">HBB", raw[:IDX_HEADER])
    if zero != 0:
        raise error.FormatError(f"{path}: bad IDX magic number", 0)
    if dtype_code != IDX_UBYTE:
        raise error.FormatError(
            f"{path}: unsupported IDX data type 0x{dtype_code:02x}", 2
        )
    dims_end = IDX_HEADER + 4 * ndim
    if len(raw) < dims_end:
        raise error.FormatError(f"{path}: truncated IDX dimensions",
                                len(raw))
    dims = struct.unpack(f">{ndim}I", raw[IDX_HEADER:dims_end])
    expected = dims_end + int(np.prod(dims, dtype=np.int64))
    if len(raw) != expected:
        raise error.FormatError(
            f"{path}: IDX payload holds {len(raw) - dims_end} bytes, header "
            f"declares {expected - dims_end}",
            min(len(raw), expected)
        )
    return np.frombuffer(raw, dtype=np.uint8, offset=dims_end).reshape(dims)


def idx_labels_path(images_path):
    head, tail = osp.split(images_path)
    if "images-idx3" not in tail:
        raise error.ConfigError(
            f"cannot derive the IDX label file for {images_path}, expected a "
            "name containing 'images-idx3'"
        )
    return osp.join(head, tail.replace("images-idx3", "labels-idx1"))


def read_idx_dataset(images_path, labels_path=None, num_classes=None):
    if labels_path is None:
        labels_path = idx_labels_path(images_path)
    images = read_idx(images_path)
    labels = read_idx(labels_path).astype(np.int64)
    if images.ndim == 3:
        images = images[:, None]
    if images.ndim != 4 or labels.ndim != 1 or len(images) != len(labels):
        raise error.FormatError(
            f"IDX shapes do not match: images {images.shape}, labels "
            f"{labels.shape}",
            IDX_HEADER
        )
    if num_classes is None:
        num_classes = int(labels.max()) + 1
    return Dataset(images.astype(np.float64) / 255.0, labels, num_classes)


def blob_prototypes(rng, num_classes, image_size=32, channels=3):
    """One random smooth prototype image per class (4x4 pixel blocks)."""
    if num_classes < 2:
        raise error.ParameterError(
            f"synthetic blobs need >= 2 classes: {num_classes}"
        )
    block = 4
    coarse = -(-image_size // block)
    protos = rng.normal(0.0, 1.0, (num_classes, channels, coarse, coarse))
    protos = protos.repeat(block, axis=2).repeat(block, axis=3)
    return protos[:, :, :image_size, :image_size]


def synthetic_blobs(rng,
                    num_classes=3,
                    per_class=200,
                    image_size=32,
                    channels=3,
                    noise=0.5,
                    prototypes=None):
    """Class-structured Gaussian blobs.

    Samples are their class prototype plus isotropic Gaussian pixel noise of
    std ``noise``, squashed into [0, 1] with a logistic function. Samples are
    ordered by class.

    Parameters
    ----------
    rng : Rng
        random number generator
    prototypes : ndarray, optional
        ``num_classes x channels x image_size x image_size`` class
        prototypes, drawn from ``rng`` if None (default=None)

    Returns
    -------
    Dataset
        uncentered, ``num_classes * per_class`` samples
    """
    if per_class < 1:
        raise error.ParameterError(f"per_class must be >= 1: {per_class}")
    if prototypes is None:
        prototypes = blob_prototypes(rng, num_classes, image_size, channels)
    num_classes = len(prototypes)
    labels = np.repeat(np.arange(num_classes), per_class)
    images = prototypes[labels] \
        + rng.normal(0.0, noise, (len(labels),) + prototypes.shape[1:])
    images = 1.0 / (1.0 + np.exp(-images))
    return Dataset(images, labels, num_classes)


def load_dataset(path, data_format, **kwargs):
    """Load a dataset and subtract its own per-pixel mean.

    Parameters
    ----------
    path : str
        data file or directory, ignored for ``synthetic``
    data_format : str
        one of ``cifar10-binary``, ``idx`` or ``synthetic``
    **kwargs
        ``rng``, ``num_classes``, ``per_class``, ``image_size``, ``noise``
        for synthetic data, ``labels_path`` for IDX

    Returns
    -------
    Dataset

    Raises
    ------
    ConfigError
        on an unknown format or a missing file
    FormatError
        if the file cannot be parsed
    """
    return read_dataset(path, data_format, **kwargs).centered()


def read_dataset(path, data_format, **kwargs):
    """Like :func:`load_dataset` but without mean subtraction."""
    if data_format == u.SYNTHETIC:
        return synthetic_blobs(**kwargs)
    if data_format not in u.DATA_FORMATS:
        raise error.ConfigError(
            f"unknown data format '{data_format}', must be one of "
            f"{u.DATA_FORMATS}"
        )
    if path is None or not osp.exists(path):
        raise error.ConfigError(f"data path does not exist: {path}")
    if data_format == u.CIFAR10_BINARY:
        return read_cifar10_binary(path)
    return read_idx_dataset(path, **kwargs)


def prepare_data(config, rng):
    """Training and test splits for a run config.

    The training split is subsampled to ``subset_size`` (stratified) and
    both splits are centered with the training mean.

    Returns
    -------
    train : Dataset
    test : Dataset

    Raises
    ------
    ConfigError
        if the data does not match ``num_classes`` of the config
    """
    proto_rng, train_rng, test_rng, subset_rng = rng.spawn(4)
    if config.data_format == u.SYNTHETIC:
        protos = blob_prototypes(proto_rng, config.num_classes,
                                 config.image_size)
        train = synthetic_blobs(train_rng,
                                per_class=config.synthetic_train_per_class,
                                noise=config.synthetic_noise,
                                prototypes=protos)
        test = synthetic_blobs(test_rng,
                               per_class=config.synthetic_test_per_class,
                               noise=config.synthetic_noise,
                               prototypes=protos)
    else:
        kwargs = {}
        if config.data_format == u.IDX:
            kwargs["num_classes"] = config.num_classes
        train = read_dataset(config.train_path, config.data_format, **kwargs)
        test = read_dataset(config.test_path, config.data_format, **kwargs)
        if train.num_classes != config.num_classes:
            raise error.ConfigError(
                f"{config.data_format} data has {train.num_classes} classes, "
                f"config num_classes is {config.num_classes}"
            )
    if config.subset_size is not None:
        train = stratified_subset(train, config.subset_size, subset_rng)
    train = train.centered()
    return train, test.centered(train.per_pixel_mean)
