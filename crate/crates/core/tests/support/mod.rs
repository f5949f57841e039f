//! Helpers shared by the integration tests and the service acceptance suite.
#![allow(dead_code)]

pub mod oracle;
pub mod walk;
