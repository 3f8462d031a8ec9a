//! Expansiveness of surface flows, decided (or semi-decided with explicit
//! certificates) from exact combinatorial and arithmetic data.
//!
//! The library covers four presentations of a flow:
//!
//! * interval exchange maps of the circle ([`iem`]),
//! * their combinatorial suspensions as translation-surface complexes
//!   ([`suspension`]),
//! * assemblies built from suspensions by surgery — fake saddles, cuts and
//!   gluings along saddle connections, boundary operations ([`surgery`]),
//! * rational polygonal billiards via the reflection-group unfolding
//!   ([`billiard`]).
//!
//! All decisions are made over exact arithmetic in `Q` or a real quadratic
//! extension `Q(sqrt(d))` ([`exactnum`]); floating point appears only in
//! rendering. Verdicts are three-valued (`Yes`/`No`/`Unknown`) and every
//! definite verdict carries a finite, independently re-checkable witness.
//! The orbit pseudo-distance apparatus used in empirical separation
//! experiments lives in [`metricflow`].

pub mod billiard;
pub mod exactnum;
pub mod iem;
pub mod metricflow;
pub mod surgery;
pub mod suspension;

pub use exactnum::{BigRational, QuadExtScalar};

