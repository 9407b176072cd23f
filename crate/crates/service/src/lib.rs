//! JSON-over-HTTP facade for ridgeview.
//!
//! A data root holds one directory per dataset (`domain.json`,
//! `designs.csv`, `geometry.json`). Each is turned into a [`DatasetBundle`]
//! at startup. [`App`] answers `GET` requests for datasets, plots,
//! subspaces, meshes and diffs, and applies session events; [`router`]
//! puts it behind axum.

mod app;
mod bundle;
mod http;

pub use app::{App, Response, JSON, STL};
pub use bundle::{
    analyze_qoi, compute_bundle, load_data_root, load_dataset_dir, resolve_data_root, BundleError, BundleOptions,
    DatasetBundle, QoiAnalysis, DATA_ROOT_ENV,
};
pub use http::{build_app, router, serve, serve_on, ServeError, ServiceConfig};
