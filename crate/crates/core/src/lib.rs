//! L-functions of the exponential sums x^d + λx over finite fields and the
//! symmetric-power L-functions of the cubic family, computed both by exact
//! character sums and by Dwork's p-adic cohomology.

pub mod cyclo;
pub mod deform;
pub mod dwork;
pub mod ff;
pub mod linalg;
pub mod lpoly;
pub mod newton;
pub mod oracle;
pub mod padic;
pub mod series;
pub mod sympow;
