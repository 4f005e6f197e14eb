//! Small trainable models and the two experiments built on them.

pub mod classifier;
pub mod experiments;
pub mod mlp;
pub mod regressor;

pub use classifier::{evaluate_classifier, train_classifier, Classifier, ClassifierEval, InvariantMode, MlpConfig};
pub use experiments::{
    run_swissroll_sweep, run_vectorfield_experiment, summarize_sweep, train_test_split, SwissConfig, SwissRow,
    VectorFieldConfig, VectorFieldReport,
};
pub use mlp::{Activation, Mlp, Optimizer, TrainConfig};
pub use regressor::{evaluate_regressor, train_vector_regressor, RegressorEval, VectorModelConfig, VectorModelKind, VectorRegressor};
