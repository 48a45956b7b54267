//! Finite von Neumann algebras as weighted direct sums of matrix blocks,
//! with operators affiliated to them, their measure-type topologies, unitary
//! groups and Lie algebras, and tensor products.

pub mod linops;
pub mod blockvn;
pub mod topologies;
pub mod liealg;
pub mod families;
pub mod random;
pub mod suites;
pub mod tensorcat;
