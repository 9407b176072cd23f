#![allow(dead_code)]

use std::path::Path;

use ridgeview::demo::{generate_demo, write_demo, DemoConfig};
use ridgeview::geometry::blade::BladeConfig;
use ridgeview_service::{load_data_root, App, BundleOptions};

pub fn small_demo() -> DemoConfig {
    DemoConfig {
        n: 90,
        seed: 11,
        noise_sd: 0.0,
        blade: BladeConfig {
            sections: 2,
            chord_points: 6,
            span_stations: 4,
            ..BladeConfig::default()
        },
    }
}

/// Data root with datasets `alpha` and `beta`.
pub fn data_root(dir: &Path) {
    let a = generate_demo(&small_demo()).unwrap();
    write_demo(&a, &dir.join("alpha")).unwrap();
    let b = generate_demo(&DemoConfig { n: 80, seed: 12, ..small_demo() }).unwrap();
    write_demo(&b, &dir.join("beta")).unwrap();
}

pub fn app(dir: &Path) -> App {
    data_root(dir);
    let bundles = load_data_root(dir, &BundleOptions::default()).unwrap();
    App::new(bundles).with_clock(|| "2026-01-01T00:00:00.000Z".to_string())
}

pub fn json(body: &[u8]) -> serde_json::Value {
    serde_json::from_slice(body).unwrap()
}
