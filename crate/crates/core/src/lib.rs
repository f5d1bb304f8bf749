//! Grassmannian predictive coding of channel directions on G(n,1).

pub mod analysis;
pub mod channel;
pub mod codebook;
pub mod codec;
pub mod cvec;
pub mod experiments;
pub mod grassmann;
pub mod mumimo;
pub mod rng;

pub use codebook::{DirectionCodebook, MagnitudeCodebook, ShapeGainCodebook};
pub use codec::{CodewordIndex, GpcState, InitMode, TangentQuantizer};
pub use cvec::C64;
pub use grassmann::{GeometryError, GrassmannPoint, TangentVector};
