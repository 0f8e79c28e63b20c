//! Exact enumeration of directed ribbon graphs (dessins d'enfants with simple
//! ramification over one point) by several independent routes: Cut-and-Join
//! flows on a bosonic Fock space, the Tutte recursion, Virasoro constraints,
//! brute-force permutation enumeration, and topological recursion on the curve
//! `x = z + 1/z`, `y = 1/z`.

pub mod diffop;
pub mod enumerate;
pub mod opmatrix;
pub mod partition;
pub mod ratseries;
pub mod report;
pub mod spectral;
pub mod suites;
pub mod tutte;
