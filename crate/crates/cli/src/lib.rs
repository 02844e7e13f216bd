pub mod calibration;
pub mod experiment;
pub mod labreport;
pub mod models;
pub mod script;
