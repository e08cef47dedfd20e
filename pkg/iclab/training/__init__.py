from iclab.training.config import (
    RunConfig, ConfigLoader, load_config, dump_config
)
from iclab.training.data import (
    Dataset, load_dataset, read_dataset, prepare_data, stratified_subset,
    synthetic_blobs
)
from iclab.training.augment import augment, shift_and_flip
from iclab.training.optim import (
    Adam, AdamState, SGD, adam_step, LearningRateSchedule, make_optimizer
)
from iclab.training.metrics import (
    EpochRecord, stability_metric, read_metrics_csv
)
from iclab.training.trainer import Trainer, TrainResult, train
