//! Scalar abstraction shared by every numeric routine in this crate.
//!
//! All algorithms are generic over [`Real`], so the same code runs in `f32`
//! and `f64`. Concrete `f64` aliases for the container types live at the
//! crate root.

use num_traits::{FromPrimitive, ToPrimitive};

/// Floating-point scalar type usable by every routine in this crate.
pub trait Real: nalgebra::RealField + FromPrimitive + ToPrimitive + Copy {}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal into the active scalar type.
///
/// Cannot fail for the provided impls; the panic guards a custom scalar with
/// a narrower exponent range.
pub fn real<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("literal not representable in the scalar type")
}

/// Converts the active scalar into `f64` for reporting and serialization.
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().expect("scalar not representable as f64")
}
