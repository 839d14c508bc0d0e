pub mod error;
pub mod hamparse;
pub mod hgm;
pub mod hje;
pub mod orealg;
pub mod pfaffian;
pub mod pipeline;
pub mod ring;

pub use error::{Error, Result};
