//! Example data shipped with the library.

use crate::io::load_project;
use crate::model::Project;

const ARP4761_PROJECT: &str = include_str!("../data/arp4761_project.json");
const MINIMAL_CONTROL_LOOP: &str = include_str!("../data/minimal_control_loop.json");

pub use crate::analysis::{bundled_profiles_json, modaf_profiles};
pub use crate::taxonomy::{bundled_catalog_json, default_catalog};

/// Aircraft "decelerate on the ground" analysis: five objects and the
/// three causal paths CP1 to CP3.
pub fn arp4761_project_json() -> &'static str {
    ARP4761_PROJECT
}

pub fn arp4761_project() -> Project {
    load_project(ARP4761_PROJECT).expect("bundled ARP-4761 project is valid")
}

/// Controller, actuator, controlled process and sensor in one loop.
pub fn minimal_control_loop_json() -> &'static str {
    MINIMAL_CONTROL_LOOP
}
