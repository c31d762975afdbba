//! Reverse-mode tensor engine and the quaternion convolution network.

pub mod gradcheck;
pub mod model;
pub mod tensor;
pub mod train;

pub use model::{
    accuracy, chebyshev_filter_response, forward, init_params, parse_checkpoint, predict,
    qconv, qmm, qtensor_constant, qtensor_from_real, qtensor_param, qtensor_value, split_relu,
    unwind, write_checkpoint, Checkpoint, ForwardPass, HeadKind, ModelConfig, ModelParams,
    QTensor,
};
pub use tensor::{Tape, TensorId};
pub use train::{evaluate, history_csv, train, EpochStat, TrainOutcome, TrainTarget};
