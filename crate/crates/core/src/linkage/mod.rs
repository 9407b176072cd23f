//! Linked-view session state.
//!
//! A session holds one global selection shared by both summary plots and
//! the geometry view, the pose of each plot, and an append-only log of the
//! events that produced it. Replaying the log from a fresh session gives
//! back the same state.

mod orientation;
mod session;

pub use orientation::{Axis, InvalidOrientation, Orientation};
pub use session::{
    default_layout, parse_log, replay, selection_result, to_log_line, Event, LogParseError, LogRecord, PlotId,
    PlotPoint, PlotPose, ReplayError, SelectionResult, Selector, SessionState, LAYOUT_RADIUS,
};

use std::collections::BTreeMap;

use thiserror::Error;

use crate::geometry::DiffSummary;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinkageError {
    #[error("dataset `{0}` is not loaded")]
    NoDataset(String),
    #[error("design index {index} is out of range for {count} designs")]
    IndexOutOfRange { index: usize, count: usize },
    #[error("plot {plot:?}: selector `{selector}` is not active")]
    SelectorInactive { plot: PlotId, selector: String },
    #[error("plot {0:?} is not part of this session")]
    UnknownPlot(PlotId),
    #[error("move_plots needs at least one plot")]
    EmptyPlotSet,
    #[error("no datasets are available")]
    EmptyCatalog,
    #[error("rotation direction must be 1 or -1, got {0}")]
    InvalidDirection(i8),
    #[error("move target must be finite")]
    NonFiniteTarget,
}

impl LinkageError {
    /// Errors caused by a malformed request rather than by the session's
    /// current state.
    pub fn is_malformed(&self) -> bool {
        matches!(self, LinkageError::InvalidDirection(_) | LinkageError::NonFiniteTarget)
    }
}

pub type Result<T, E = LinkageError> = std::result::Result<T, E>;

/// The datasets a session can switch between, in cycling order.
pub trait DesignIndex {
    fn dataset_ids(&self) -> Vec<String>;
    fn design_count(&self, dataset_id: &str) -> Option<usize>;
}

impl DesignIndex for BTreeMap<String, usize> {
    fn dataset_ids(&self) -> Vec<String> {
        self.keys().cloned().collect()
    }

    fn design_count(&self, dataset_id: &str) -> Option<usize> {
        self.get(dataset_id).copied()
    }
}

/// Per-design payloads shown by the linked views.
pub trait LinkedViews: DesignIndex {
    fn plot_point(&self, dataset_id: &str, plot: PlotId, index: usize) -> Option<PlotPoint>;
    fn geometry_key(&self, dataset_id: &str, index: usize) -> Option<String>;
    fn diff_summary(&self, dataset_id: &str, index: usize) -> Option<DiffSummary>;
}
