//! Finsler curvature of Kropina metrics `F = α²/β`.
//!
//! Two independent routes are provided: a first-principles pipeline that
//! differentiates any 2-homogeneous `F²` with nested forward-mode duals
//! ([`finsler`]), and closed-form Kropina expressions built from the
//! covariant-derivative data of `β` ([`kropina`]). The closed forms drive a
//! classifier for isotropic scalar curvature.

pub mod autodiff;
pub mod fields;
pub mod linalg;
pub mod finsler;
pub mod kropina;
pub mod riemannian;
