//! A mutable analysis session shared by the script executor and the server.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cluster::{self, ClusterAssignment, ClusterConfig, ClusterError};
use crate::model::{Dataset, ModelError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SessionError {
    #[error("no dataset has been imported")]
    NoDataset,
    #[error("merge requires a preceding cluster step")]
    MergeBeforeCluster,
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

impl SessionError {
    /// Whether the error is about step ordering rather than bad input.
    pub fn is_ordering(&self) -> bool {
        matches!(self, SessionError::NoDataset | SessionError::MergeBeforeCluster)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SessionOp {
    Cluster(ClusterConfig),
    Merge,
    RemoveCr { lo: u64, hi: u64 },
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Session {
    pub dataset: Option<Dataset>,
    /// Assignment from the latest cluster step, consumed by merge and
    /// invalidated by any other mutation.
    pub assignment: Option<ClusterAssignment>,
}

impl Session {
    pub fn new(dataset: Dataset) -> Self {
        Self { dataset: Some(dataset), assignment: None }
    }

    pub fn dataset(&self) -> Result<&Dataset, SessionError> {
        self.dataset.as_ref().ok_or(SessionError::NoDataset)
    }

    pub fn op_log_len(&self) -> usize {
        self.dataset.as_ref().map_or(0, |d| d.op_log.len())
    }

    pub fn apply(&mut self, op: &SessionOp) -> Result<(), SessionError> {
        let dataset = self.dataset.as_mut().ok_or(SessionError::NoDataset)?;
        match op {
            SessionOp::Cluster(config) => {
                let assignment = cluster::cluster(dataset, config)?;
                cluster::annotate(dataset, &assignment, config);
                self.assignment = Some(assignment);
            }
            SessionOp::Merge => {
                let assignment = self.assignment.take().ok_or(SessionError::MergeBeforeCluster)?;
                *dataset = cluster::merge(dataset, &assignment)?;
            }
            SessionOp::RemoveCr { lo, hi } => {
                dataset.remove_by_ncr(*lo, *hi)?;
                for r in &mut dataset.references {
                    r.cluster_id = None;
                }
                self.assignment = None;
            }
        }
        Ok(())
    }
}
