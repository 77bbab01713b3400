//! Desk-scale training tasks: datasets, the MLP, and the loop that drives a
//! genome's optimizer over them.

mod data;
pub mod idx;
pub mod mlp;
mod train;

pub use data::{make_blobs, subsample};
pub use idx::{load_idx, IdxData, IdxError};
pub use mlp::{accuracy, backward, forward_loss, init_mlp, loss_and_gradient, MlpModel, ModelError};
pub use train::{train, train_with_clip, DivergenceReason, TrainRun};

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::sync::Arc;

/// Environment variable naming the directory with MNIST-style IDX files.
pub const DATA_DIR_ENV: &str = "EVO_OPT_DATA_DIR";

#[derive(Debug, thiserror::Error)]
pub enum TaskError {
    #[error("invalid task: {0}")]
    Spec(String),
    #[error(transparent)]
    Idx(#[from] IdxError),
    #[error("unknown task `{name}`; known tasks: {known}")]
    Unknown { name: String, known: String },
}

/// Feature matrices (row-major) with integer labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub dim: usize,
    pub classes: usize,
    pub train_x: Vec<f64>,
    pub train_y: Vec<u32>,
    pub test_x: Vec<f64>,
    pub test_y: Vec<u32>,
}

impl Dataset {
    pub fn n_train(&self) -> usize {
        self.train_y.len()
    }

    pub fn n_test(&self) -> usize {
        self.test_y.len()
    }

    pub fn train_row(&self, i: usize) -> &[f64] {
        &self.train_x[i * self.dim..(i + 1) * self.dim]
    }

    fn clone_test_only(&self) -> Dataset {
        Dataset {
            dim: self.dim,
            classes: self.classes,
            train_x: Vec::new(),
            train_y: Vec::new(),
            test_x: self.test_x.clone(),
            test_y: self.test_y.clone(),
        }
    }

    /// Builds a dataset from separate train and test IDX pairs.
    pub fn from_idx(train: IdxData, test: IdxData) -> Result<Dataset, TaskError> {
        if train.dim() != test.dim() {
            return Err(TaskError::Spec(format!("train dim {} != test dim {}", train.dim(), test.dim())));
        }
        let classes = train.labels.iter().chain(&test.labels).copied().max().map_or(0, |m| m as usize + 1).max(2);
        Ok(Dataset {
            dim: train.dim(),
            classes,
            train_x: train.features,
            train_y: train.labels,
            test_x: test.features,
            test_y: test.labels,
        })
    }

    /// Loads `train-*` and `t10k-*` IDX files (optionally gzipped) from `dir`.
    pub fn load_idx_dir(dir: &Path) -> Result<Dataset, TaskError> {
        let train =
            load_idx(&idx::locate(dir, "train-images-idx3-ubyte"), &idx::locate(dir, "train-labels-idx1-ubyte"))?;
        let test = load_idx(&idx::locate(dir, "t10k-images-idx3-ubyte"), &idx::locate(dir, "t10k-labels-idx1-ubyte"))?;
        Dataset::from_idx(train, test)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum TaskSource {
    Blobs {
        seed: u64,
        n_per_class: usize,
        dim: usize,
        classes: usize,
        sigma: f64,
    },
    /// IDX files in `dir`; without a directory the run's data directory is used.
    Idx {
        #[serde(default)]
        dir: Option<PathBuf>,
    },
}

/// A dataset recipe plus the model and training protocol bound to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskSpec {
    pub name: String,
    pub source: TaskSource,
    /// Training examples drawn; `None` keeps the full training split.
    #[serde(default)]
    pub subset_size: Option<usize>,
    #[serde(default)]
    pub subset_seed: u64,
    pub hidden_width: usize,
    pub batch_size: usize,
    pub steps: usize,
}

pub const BUILTIN_TASKS: [&str; 3] = ["blobs", "blobs-easy", "mnist"];

impl TaskSpec {
    /// Four overlapping-ish Gaussian blobs in 8 dimensions.
    pub fn blobs() -> TaskSpec {
        TaskSpec {
            name: "blobs".into(),
            source: TaskSource::Blobs { seed: 0, n_per_class: 250, dim: 8, classes: 4, sigma: 0.3 },
            subset_size: None,
            subset_seed: 0,
            hidden_width: 16,
            batch_size: 64,
            steps: 200,
        }
    }

    /// Two tight, linearly separable blobs.
    pub fn blobs_easy() -> TaskSpec {
        TaskSpec {
            name: "blobs-easy".into(),
            source: TaskSource::Blobs { seed: 0, n_per_class: 250, dim: 2, classes: 2, sigma: 0.05 },
            ..TaskSpec::blobs()
        }
    }

    /// 2,000-example MNIST subset.
    pub fn mnist() -> TaskSpec {
        TaskSpec {
            name: "mnist".into(),
            source: TaskSource::Idx { dir: None },
            subset_size: Some(2000),
            subset_seed: 0,
            hidden_width: 64,
            batch_size: 64,
            steps: 200,
        }
    }

    pub fn builtin(name: &str) -> Result<TaskSpec, TaskError> {
        match name {
            "blobs" => Ok(TaskSpec::blobs()),
            "blobs-easy" => Ok(TaskSpec::blobs_easy()),
            "mnist" => Ok(TaskSpec::mnist()),
            _ => Err(TaskError::Unknown { name: name.into(), known: BUILTIN_TASKS.join(", ") }),
        }
    }

    pub fn with_steps(mut self, steps: usize) -> Self {
        self.steps = steps;
        self
    }

    /// Materializes the dataset (loading and subsampling) and checks the
    /// protocol against it.
    pub fn prepare(&self, data_dir: &Path) -> Result<PreparedTask, TaskError> {
        if self.hidden_width == 0 || self.batch_size == 0 || self.steps == 0 {
            return Err(TaskError::Spec(format!("{}: hidden_width, batch_size and steps must be >= 1", self.name)));
        }
        let full = match &self.source {
            TaskSource::Blobs { seed, n_per_class, dim, classes, sigma } => {
                make_blobs(*seed, *n_per_class, *dim, *classes, *sigma)?
            }
            TaskSource::Idx { dir } => Dataset::load_idx_dir(dir.as_deref().unwrap_or(data_dir))?,
        };
        let dataset = match self.subset_size {
            Some(n) => subsample(&full, n, self.subset_seed)?,
            None => full,
        };
        if self.batch_size > dataset.n_train() {
            return Err(TaskError::Spec(format!(
                "{}: batch_size {} exceeds {} training examples",
                self.name,
                self.batch_size,
                dataset.n_train()
            )));
        }
        if dataset.n_test() == 0 {
            return Err(TaskError::Spec(format!("{}: empty test split", self.name)));
        }
        Ok(PreparedTask { spec: self.clone(), dataset: Arc::new(dataset) })
    }
}

/// A task whose dataset is loaded and ready; cheap to clone and share.
#[derive(Debug, Clone)]
pub struct PreparedTask {
    pub spec: TaskSpec,
    pub dataset: Arc<Dataset>,
}

impl PreparedTask {
    pub fn name(&self) -> &str {
        &self.spec.name
    }
}

/// `$EVO_OPT_DATA_DIR`, else `data/mnist` under the working directory, else
/// the copy shipped with this repository.
pub fn default_data_dir() -> PathBuf {
    if let Some(dir) = std::env::var_os(DATA_DIR_ENV) {
        return PathBuf::from(dir);
    }
    let local = PathBuf::from("data/mnist");
    if local.is_dir() {
        return local;
    }
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/mnist")
}
