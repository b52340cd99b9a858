pub mod basis;
pub mod config;
pub mod domain;
pub mod error;
pub mod evolution;
pub mod experiment;
pub mod kan;
pub mod metrics;
pub mod init_fit;
pub mod numerics;
pub mod oracle;
pub mod pde;
pub mod trial;

pub use error::{Error, Result};
pub use kan::{edge_phi, EdgeFunction, KanNetwork, LayerSpec};
