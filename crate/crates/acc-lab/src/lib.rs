//! # acc-lab
//!
//! A numerical laboratory for an energy-based atomistic/continuum (a/c) coupling
//! method for pair potentials on the 2D triangular lattice, with point defects
//! (vacancies) and periodic boundary conditions.
//!
//! The crate provides the full pipeline:
//!
//! * exact integer/rational lattice geometry ([`lattice`], [`geom`]),
//! * pair potentials and Cauchy–Born stored energy ([`potential`]),
//! * coupled atomistic/continuum meshes with graded coarsening and exact
//!   bond tracing ([`mesh`]),
//! * energies, gradients and Hessians of the atomistic model and of the
//!   bond-integral coupled model, in both the bond form and the practical
//!   volume form ([`assembly`]),
//! * vacancy extension operators and the defect stability index `kappa`,
//!   including an exact rational computation of the single-vacancy index
//!   ([`defects`]),
//! * sharp stability constants and stability regions ([`stability`]),
//! * preconditioned nonlinear CG / Newton solvers and critical-strain
//!   continuation ([`solver`]),
//! * end-to-end convergence and stability experiments ([`experiments`]).
//!
//! ## Running the examples
//!
//! The primary interface of this crate is its `examples/` directory; each example
//! is a self-contained, runnable study. Run them from the workspace root:
//!
//! ```text
//! cargo run --release -p acc-lab --example <name> [-- args]
//! ```
//!
//! ### Geometry and lattice structure
//! * `lattice_tour` — periodic cells (square and hexagonal), direction shells
//!   and their six-fold orbits, finite differences, the hexagonal summation
//!   identities.
//! * `mesh_gallery` — micro-triangulations and graded (radial/algebraic) coupled
//!   meshes; writes `.node`/`.ele` files and checks the bond-density identity.
//!
//! ### Models and their consistency
//! * `potential_profiles` — Lennard-Jones and Morse profiles, derivatives, decay
//!   moduli, and the Cauchy–Born energy density.
//! * `energy_consistency` — bond form vs practical form of the coupled energy,
//!   absence of ghost forces at homogeneous deformations, finite-difference
//!   checks of gradients and Hessians.
//!
//! ### Defects and stability
//! * `vacancy_extension` — least-squares extension of displacements to vacancy
//!   sites; compares against local averaging.
//! * `kappa_table` — the vacancy stability index for single vacancies and
//!   divacancies at several separations (and its cell-size sensitivity).
//! * `analytic_kappa` — the exact rational computation of the single-vacancy
//!   index (`kappa = 2/7`) via symmetry-adapted 6x6 pencils.
//! * `stability_constants` — shell constants, homogeneous and defect-aware
//!   stability bounds `gamma_hom`/`gamma` for a deformation class.
//! * `stability_region` — stable regions in the (m, M) singular-value plane and
//!   in a two-parameter strain family; writes CSV scans.
//!
//! ### Solving and experiments
//! * `relax_vacancy` — preconditioned nonlinear CG relaxation of a vacancy,
//!   with solver trace CSV and a displacement snapshot file.
//! * `vacancy_convergence` — coupled-vs-atomistic error of the relaxed vacancy
//!   against coarsening radius and mesh grading; compares with the closed-form
//!   error model.
//! * `cavity_convergence` — the collapsed-cavity (dislocation-pair) variant.
//! * `critical_strain` — continuation in uniaxial strain to the first loss of
//!   stability; atomistic limit vs coupled approximations.
//! * `error_model_tables` — closed-form error/DoF model of graded meshes and
//!   its asymptotic regimes.
//!
//! A thin command-line front end `acc-lab` wraps the experiment drivers
//! (`acc-lab run <spec.toml>`, `acc-lab kappa`, `acc-lab stability-region`,
//! `acc-lab error-model`); see `acc-lab --help`.
//!
//! ## Conventions
//!
//! Lattice sites are addressed by integer coordinates `(i, j)` with Cartesian
//! position `A6 * (i, j)` where `A6 = [[1, 1/2], [0, sqrt(3)/2]]`. All mesh
//! vertices are lattice sites, so mesh geometry (point location, bond tracing,
//! areas) is evaluated in exact integer/rational arithmetic; floating point
//! enters only through potentials and linear algebra. Deformations are stored
//! as periodic displacements `u` relative to the homogeneous state `y_B(x) = B x`.

#![warn(rust_2018_idioms)]

pub mod assembly;
pub mod config;
pub mod defects;
pub mod experiments;
pub mod geom;
pub mod lattice;
pub mod linalg;
pub mod mesh;
pub mod potential;
pub mod solver;
pub mod stability;

mod error;

pub use error::Error;

/// Crate-wide result type.
pub type Result<T> = std::result::Result<T, Error>;
