//! Dense linear algebra, least squares, quadrature and dual numbers.

mod dual;
mod lstsq;
pub(crate) mod matrix;
mod quadrature;

pub use dual::{Dual2, Scalar};
pub use lstsq::{condition_number, singular_values, solve_least_squares, LstsqMethod, LstsqSolution};
pub use matrix::DenseMatrix;
pub use quadrature::{gauss_legendre_1d, gauss_legendre_grid, tensor_grid, QuadratureGrid, Rule1d};
