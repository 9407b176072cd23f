use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::orientation::{Axis, Orientation};
use super::{DesignIndex, LinkageError, LinkedViews, Result};
use crate::geometry::DiffSummary;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PlotId {
    A,
    B,
}

impl PlotId {
    pub const ALL: [PlotId; 2] = [PlotId::A, PlotId::B];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotPose {
    pub position: [f64; 3],
    pub orientation: Orientation,
    pub move_selector_active: bool,
    pub rotation_selector_active: Option<Axis>,
}

impl PlotPose {
    pub fn at(position: [f64; 3]) -> Self {
        Self {
            position,
            orientation: Orientation::IDENTITY,
            move_selector_active: false,
            rotation_selector_active: None,
        }
    }
}

/// Distance from the viewer to each plot in the initial layout.
pub const LAYOUT_RADIUS: f64 = 3.0;

/// Viewer at the origin looking down -Z; plot A on the left and plot B on
/// the right, each 45° off the forward axis at [`LAYOUT_RADIUS`].
pub fn default_layout() -> BTreeMap<PlotId, PlotPose> {
    let (s, c) = std::f64::consts::FRAC_PI_4.sin_cos();
    let r = LAYOUT_RADIUS;
    BTreeMap::from([
        (PlotId::A, PlotPose::at([-r * s, 0.0, -r * c])),
        (PlotId::B, PlotPose::at([r * s, 0.0, -r * c])),
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selector {
    Move,
    RotateX,
    RotateY,
    RotateZ,
}

impl Selector {
    fn axis(self) -> Option<Axis> {
        match self {
            Selector::Move => None,
            Selector::RotateX => Some(Axis::X),
            Selector::RotateY => Some(Axis::Y),
            Selector::RotateZ => Some(Axis::Z),
        }
    }
}

fn yes() -> bool {
    true
}

/// A session operation. On the wire: `{"op": "<name>", "args": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", content = "args", rename_all = "snake_case", deny_unknown_fields)]
pub enum Event {
    SelectPoint {
        plot: PlotId,
        index: usize,
    },
    ClearSelection {},
    ActivateSelector {
        plot: PlotId,
        selector: Selector,
        #[serde(default = "yes")]
        active: bool,
    },
    RotatePlot {
        plot: PlotId,
        axis: Axis,
        direction: i8,
    },
    MovePlots {
        plots: Vec<PlotId>,
        target: [f64; 3],
    },
    ResetSession {},
    NextDataset {},
}

impl Event {
    /// Parse a wire event, treating a missing `args` as `{}`.
    pub fn from_json(value: serde_json::Value) -> serde_json::Result<Self> {
        let mut value = value;
        if let Some(obj) = value.as_object_mut() {
            obj.entry("args").or_insert_with(|| serde_json::json!({}));
        }
        serde_json::from_value(value)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Event::SelectPoint { .. } => "select_point",
            Event::ClearSelection {} => "clear_selection",
            Event::ActivateSelector { .. } => "activate_selector",
            Event::RotatePlot { .. } => "rotate_plot",
            Event::MovePlots { .. } => "move_plots",
            Event::ResetSession {} => "reset_session",
            Event::NextDataset {} => "next_dataset",
        }
    }
}

/// One line of the session log: `{"t": "<timestamp>", "op": ..., "args": ...}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub t: String,
    #[serde(flatten)]
    pub event: Event,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionState {
    pub dataset_id: String,
    pub selected_index: Option<usize>,
    pub plot_poses: BTreeMap<PlotId, PlotPose>,
    pub initial_layout: BTreeMap<PlotId, PlotPose>,
    pub history: Vec<LogRecord>,
}

impl SessionState {
    pub fn new(dataset_id: impl Into<String>, layout: BTreeMap<PlotId, PlotPose>) -> Self {
        Self {
            dataset_id: dataset_id.into(),
            selected_index: None,
            plot_poses: layout.clone(),
            initial_layout: layout,
            history: Vec::new(),
        }
    }

    /// Fresh session on the first dataset of `index`.
    pub fn initial(index: &dyn DesignIndex, layout: BTreeMap<PlotId, PlotPose>) -> Result<Self> {
        let first = index.dataset_ids().into_iter().next().ok_or(LinkageError::EmptyCatalog)?;
        Ok(Self::new(first, layout))
    }

    fn pose(&self, plot: PlotId) -> Result<&PlotPose> {
        self.plot_poses.get(&plot).ok_or(LinkageError::UnknownPlot(plot))
    }

    /// Apply one event. On error the state is left untouched and nothing is
    /// logged; on success the record is appended to the history.
    pub fn apply(&mut self, record: LogRecord, index: &dyn DesignIndex) -> Result<()> {
        match &record.event {
            Event::SelectPoint { plot, index: i } => self.select_point(*plot, *i, index)?,
            Event::ClearSelection {} => self.clear_selection(),
            Event::ActivateSelector { plot, selector, active } => self.activate_selector(*plot, *selector, *active)?,
            Event::RotatePlot { plot, axis, direction } => self.rotate_plot(*plot, *axis, *direction)?,
            Event::MovePlots { plots, target } => self.move_plots(plots, *target)?,
            Event::ResetSession {} => self.reset_session(),
            Event::NextDataset {} => self.next_dataset(index)?,
        }
        self.history.push(record);
        Ok(())
    }

    /// The same index is selected on both plots and in the geometry view,
    /// whichever plot the pick came from.
    fn select_point(&mut self, plot: PlotId, i: usize, index: &dyn DesignIndex) -> Result<()> {
        self.pose(plot)?;
        let count = index
            .design_count(&self.dataset_id)
            .ok_or_else(|| LinkageError::NoDataset(self.dataset_id.clone()))?;
        if i >= count {
            return Err(LinkageError::IndexOutOfRange { index: i, count });
        }
        self.selected_index = Some(i);
        Ok(())
    }

    fn clear_selection(&mut self) {
        self.selected_index = None;
    }

    /// Turning a rotation selector on turns every other rotation selector
    /// off, on both plots.
    fn activate_selector(&mut self, plot: PlotId, selector: Selector, active: bool) -> Result<()> {
        self.pose(plot)?;
        match selector.axis() {
            None => self.plot_poses.get_mut(&plot).expect("checked").move_selector_active = active,
            Some(axis) if active => {
                for pose in self.plot_poses.values_mut() {
                    pose.rotation_selector_active = None;
                }
                self.plot_poses.get_mut(&plot).expect("checked").rotation_selector_active = Some(axis);
            }
            Some(axis) => {
                let pose = self.plot_poses.get_mut(&plot).expect("checked");
                if pose.rotation_selector_active == Some(axis) {
                    pose.rotation_selector_active = None;
                }
            }
        }
        Ok(())
    }

    fn rotate_plot(&mut self, plot: PlotId, axis: Axis, direction: i8) -> Result<()> {
        let positive = match direction {
            1 => true,
            -1 => false,
            other => return Err(LinkageError::InvalidDirection(other)),
        };
        if self.pose(plot)?.rotation_selector_active != Some(axis) {
            return Err(LinkageError::SelectorInactive {
                plot,
                selector: format!("rotate_{}", format!("{axis:?}").to_lowercase()),
            });
        }
        let pose = self.plot_poses.get_mut(&plot).expect("checked");
        pose.orientation = Orientation::quarter_turn(axis, positive).compose(&pose.orientation);
        Ok(())
    }

    /// Translate the plots so that their barycentre lands on `target`.
    fn move_plots(&mut self, plots: &[PlotId], target: [f64; 3]) -> Result<()> {
        if target.iter().any(|v| !v.is_finite()) {
            return Err(LinkageError::NonFiniteTarget);
        }
        let set: BTreeSet<PlotId> = plots.iter().copied().collect();
        if set.is_empty() {
            return Err(LinkageError::EmptyPlotSet);
        }
        for &plot in &set {
            if !self.pose(plot)?.move_selector_active {
                return Err(LinkageError::SelectorInactive {
                    plot,
                    selector: "move".into(),
                });
            }
        }
        let n = set.len() as f64;
        let mut shift = [0.0; 3];
        for k in 0..3 {
            let centre = set.iter().map(|p| self.plot_poses[p].position[k]).sum::<f64>() / n;
            shift[k] = target[k] - centre;
        }
        for plot in &set {
            let pose = self.plot_poses.get_mut(plot).expect("checked");
            for k in 0..3 {
                pose.position[k] += shift[k];
            }
        }
        Ok(())
    }

    fn reset_session(&mut self) {
        self.selected_index = None;
        self.plot_poses = self.initial_layout.clone();
    }

    fn next_dataset(&mut self, index: &dyn DesignIndex) -> Result<()> {
        let ids = index.dataset_ids();
        if ids.is_empty() {
            return Err(LinkageError::EmptyCatalog);
        }
        let next = match ids.iter().position(|id| *id == self.dataset_id) {
            Some(p) => ids[(p + 1) % ids.len()].clone(),
            None => ids[0].clone(),
        };
        self.dataset_id = next;
        self.reset_session();
        Ok(())
    }
}

/// One plot's point for the selected design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotPoint {
    pub design_index: usize,
    pub qoi: String,
    pub y: Vec<f64>,
    pub f: f64,
}

/// Everything the linked views need after a selection: both plots' points,
/// the mesh key and the displacement summary, all for one design index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    pub selected_index: usize,
    pub plot_points: BTreeMap<PlotId, PlotPoint>,
    pub geometry_key: String,
    pub diff_summary: Option<DiffSummary>,
}

pub fn selection_result(state: &SessionState, views: &dyn LinkedViews) -> Result<Option<SelectionResult>> {
    let Some(i) = state.selected_index else {
        return Ok(None);
    };
    let ds = &state.dataset_id;
    let mut plot_points = BTreeMap::new();
    for plot in PlotId::ALL {
        let point = views
            .plot_point(ds, plot, i)
            .ok_or_else(|| LinkageError::NoDataset(ds.clone()))?;
        plot_points.insert(plot, point);
    }
    let geometry_key = views
        .geometry_key(ds, i)
        .ok_or_else(|| LinkageError::NoDataset(ds.clone()))?;
    Ok(Some(SelectionResult {
        selected_index: i,
        plot_points,
        geometry_key,
        diff_summary: views.diff_summary(ds, i),
    }))
}

/// Re-run a log from a fresh session on the first dataset.
pub fn replay<I>(records: I, index: &dyn DesignIndex, layout: BTreeMap<PlotId, PlotPose>) -> Result<SessionState, ReplayError>
where
    I: IntoIterator<Item = LogRecord>,
{
    let mut state = SessionState::initial(index, layout).map_err(|source| ReplayError { record: 0, source })?;
    for (record, entry) in records.into_iter().enumerate() {
        state.apply(entry, index).map_err(|source| ReplayError { record, source })?;
    }
    Ok(state)
}

#[derive(Debug, thiserror::Error)]
#[error("log record {record}: {source}")]
pub struct ReplayError {
    /// 0-based position among the records.
    pub record: usize,
    pub source: LinkageError,
}

/// Parse a JSON-lines session log; blank lines are skipped.
pub fn parse_log(text: &str) -> Result<Vec<LogRecord>, LogParseError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let mut value: serde_json::Value = serde_json::from_str(l).map_err(|e| LogParseError {
                line: i + 1,
                message: e.to_string(),
            })?;
            let t = value
                .as_object_mut()
                .and_then(|o| o.remove("t"))
                .and_then(|t| t.as_str().map(str::to_owned));
            let event = Event::from_json(value).map_err(|e| LogParseError {
                line: i + 1,
                message: e.to_string(),
            })?;
            let t = t.ok_or_else(|| LogParseError {
                line: i + 1,
                message: "missing string field `t`".into(),
            })?;
            Ok(LogRecord { t, event })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("log line {line}: {message}")]
pub struct LogParseError {
    pub line: usize,
    pub message: String,
}

pub fn to_log_line(record: &LogRecord) -> String {
    serde_json::to_string(record).expect("log records always serialize")
}
