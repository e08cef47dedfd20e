import os

import yaml

# run config keys
SEED = "seed"
N = "n"
LAYOUT = "layout"
BOTTLENECK = "bottleneck"
NUM_CLASSES = "num_classes"
DROP_RATE = "drop_rate"
DROPOUT_MODE = "dropout_mode"
OPTIMIZER = "optimizer"
LR = "lr"
LR_MILESTONES = "lr_milestones"
MOMENTUM = "momentum"
EPOCHS = "epochs"
BATCH_SIZE = "batch_size"
EVAL_BATCH_SIZE = "eval_batch_size"
DATA_FORMAT = "data_format"
TRAIN_PATH = "train_path"
TEST_PATH = "test_path"
SUBSET_SIZE = "subset_size"
IMAGE_SIZE = "image_size"
SYNTHETIC_TRAIN = "synthetic_train_per_class"
SYNTHETIC_TEST = "synthetic_test_per_class"
SYNTHETIC_NOISE = "synthetic_noise"
AUGMENT = "augment"
OUTPUT_DIR = "output_dir"
CHECKPOINT = "checkpoint"
TENSORBOARD = "tensorboard"
VERBOSE = "verbose"
ZIGZAG_NETS = "zigzag_nets"
ZIGZAG_WIDTH = "zigzag_width"

# optimizers
ADAM = "adam"
SGD = "sgd"
OPTIMIZERS = (ADAM, SGD)

# data formats
CIFAR10_BINARY = "cifar10-binary"
IDX = "idx"
SYNTHETIC = "synthetic"
DATA_FORMATS = (CIFAR10_BINARY, IDX, SYNTHETIC)

# output file names
METRICS_FILE = "metrics.csv"
TIMING_FILE = "timing.csv"
REPORT_FILE = "report.json"
CHECKPOINT_FILE = "checkpoint.iclab"
CONFIG_FILE = "config.yaml"
DIVERGENCE_FILE = "divergence.json"


def load_yaml(file_path):
    """Load yaml file located at file path.

    Parameters
    ----------
    file_path : str
        path to yaml file

    Returns
    -------
    dict
        contents of yaml file
    """
    with open(file_path) as fin:
        content = yaml.safe_load(fin)
    return content


def get_file_name(file_path):
    """Extracts the file or dir name from file path

    Parameters
    ----------
    file_path : str
        file path

    Returns
    -------
    str
        file name with any path and extensions removed
    """
    full_file_name = file_path.split(os.sep)[-1]
    file_name = full_file_name.split(".")[0]
    return file_name

