//! Self-contained numerical kernels: tridiagonal eigenproblems, small dense
//! Hermitian eigensolvers, sparse Hermitian matrices and a preconditioned
//! block eigensolver (LOBPCG).

pub mod dense;
pub mod lobpcg;
pub mod sparse;
pub mod tridiag;

pub use lobpcg::{lobpcg, LinOp, LobpcgOptions, LobpcgResult, Precond};
pub use sparse::CsrMatrix;
pub use tridiag::{PivotedTridiagLu, SymTridiag};
