//! Deterministic desk-scale benchmark tasks and the brute-force
//! ground-truth oracle over enumerable search spaces.

mod data;
mod oracle;

pub use data::{gen_dataset, gen_teacher_regression, gen_two_spirals, load_csv, save_csv, Dataset};
pub use oracle::{oracle_train_all, spearman, OracleProtocol, OracleTable};

use crate::{Error, Result};

/// Which benchmark task to generate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaskKind {
    TeacherRegression,
    TwoSpirals,
}

impl TaskKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::TeacherRegression => "teacher-regression",
            TaskKind::TwoSpirals => "two-spirals",
        }
    }

    pub fn parse(tag: &str) -> Result<TaskKind> {
        match tag {
            "teacher-regression" => Ok(TaskKind::TeacherRegression),
            "two-spirals" => Ok(TaskKind::TwoSpirals),
            other => Err(Error::Config(format!("unknown task kind {other:?}"))),
        }
    }
}

/// Task definition. The teacher fields apply to regression only: the
/// teacher is an architecture sampled from a `single` space with
/// `teacher_nodes` nodes, built at `teacher_width`, with weights seeded
/// from `teacher_seed`. Data streams derive from `data_seed`, so the task
/// itself does not move when a pipeline's master seed changes.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskSpec {
    pub kind: TaskKind,
    pub dim: usize,
    pub n_train: usize,
    pub n_val: usize,
    pub n_test: usize,
    pub noise: f64,
    pub teacher_nodes: usize,
    pub teacher_width: usize,
    pub teacher_seed: u64,
    pub data_seed: u64,
}

impl Default for TaskSpec {
    fn default() -> Self {
        TaskSpec {
            kind: TaskKind::TeacherRegression,
            dim: 4,
            n_train: 256,
            n_val: 128,
            n_test: 128,
            noise: 0.05,
            teacher_nodes: 3,
            teacher_width: 8,
            teacher_seed: 12,
            data_seed: 42,
        }
    }
}

impl TaskSpec {
    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::Config("task dim must be >= 1".into()));
        }
        if self.n_train == 0 || self.n_val == 0 || self.n_test == 0 {
            return Err(Error::Config("task split sizes must be >= 1".into()));
        }
        if self.noise < 0.0 {
            return Err(Error::Config("task noise must be >= 0".into()));
        }
        if self.kind == TaskKind::TwoSpirals && self.dim != 2 {
            return Err(Error::Config("two-spirals requires dim = 2".into()));
        }
        if self.kind == TaskKind::TeacherRegression
            && (self.teacher_nodes == 0 || self.teacher_width == 0)
        {
            return Err(Error::Config("teacher nodes and width must be >= 1".into()));
        }
        Ok(())
    }
}
