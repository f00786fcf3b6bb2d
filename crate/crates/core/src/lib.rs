//! Pricing engine for European and American geometric down-and-out step
//! calls under hyper-exponential jump-diffusion dynamics.

pub mod config;
pub mod error;
pub mod greeks;
pub mod gs;
pub mod linalg;
pub mod mc;
pub mod model;
pub mod mr;
pub mod quadrature;
pub mod quantity;
pub mod roots;
pub mod tables;

pub use error::{Error, Result};
pub use model::{DownOutStepSpec, DualModelReport, HejdModel, JumpComponent};
pub use quadrature::QuadConfig;
pub use roots::{find_roots, RootSet};
pub use gs::{gs_invert, gs_invert_many, gs_weights, price_time_domain, price_time_domain_grid, price_time_domain_many, GsConfig};
pub use quantity::{MrPoint, MrQuantity, QuantityRegistry, Regime};
