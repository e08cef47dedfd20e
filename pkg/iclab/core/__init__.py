from iclab.core.rng import Rng
from iclab.core.tensor import (
    SAME, VALID, add, argmax, as_tensor, conv2d, conv2d_backward,
    global_avg_pool, is_finite, matmul, mul, reduce_mean, reduce_var, relu,
    reshape, sample_bernoulli, sub, transpose
)
from iclab.core.serialize import (
    read_tensor, write_tensor, save_tensor, load_tensor, tensor_to_bytes,
    tensor_from_bytes
)
