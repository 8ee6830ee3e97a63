//! Deterministic digital twin of a battery-free, closed-loop smart
//! food-packaging system.
//!
//! The loop couples five physical models at a fixed timestep: food spoilage
//! generates headspace ammonia; a carbon-nanotube chemiresistor converts it
//! to resistance; the loaded NFC antenna converts resistance to harvested
//! voltage; Joule heating converts voltage to mat temperature; and a
//! thermoresponsive gate releases antimicrobials whose headspace
//! concentration feeds back to suppress spoilage. A calibration toolkit fits
//! every free parameter to the bundled measured-anchor dataset with a
//! derivative-free simplex search verified against a brute-force grid.

pub mod calibrate;
pub mod engine;
pub mod error;
pub mod params;
pub mod release;
pub mod rf_link;
pub mod scenario;
pub mod sensor;
pub mod spoilage;
pub mod thermal;
pub mod trace;

pub use error::{Error, Result};
pub use params::CalibratedParams;
pub use scenario::ScenarioConfig;
pub use trace::{Event, EventKind, SimulationTrace};
