//! Exact rational points on smooth plane cubics: enumeration by naive
//! height, the chord-tangent group law, canonical heights, m-descent, and
//! certified determinant-method bounds with their lattice counterparts.

pub mod arith;
pub mod curvefile;
pub mod error;
pub mod forms;
pub mod descent;
pub mod detmethod;
pub mod fp;
pub mod heights;
pub mod jacobian;
pub mod lattice;
pub mod linalg;
pub mod points;
pub mod replay;
pub mod ring;
pub mod ternary;

pub use error::{Error, Result};
pub use forms::{parse_form, CubicForm, Smoothness};
