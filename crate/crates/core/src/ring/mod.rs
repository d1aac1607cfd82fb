//! Intersection pairings on blow-up towers `X(D, r)`.
//!
//! Classes are rational combinations of monomials in the base generators
//! (`w` for the Kaehler class, one generator per divisor component, optional
//! extra named classes) and the tower classes `d_(u,l)`, `t_(u,l)`. Pairings
//! against the fundamental class are computed by [`pair_eval`], which reduces
//! every monomial to a signed base monomial looked up in the intersection
//! table of `X`. The closed forms in [`closed_form`] evaluate the extremal
//! families independently and serve as an oracle for the engine.

mod class;
pub mod closed_form;
mod engine;
mod geometry;

pub use class::{TowerClass, TowerMonomial};
pub use closed_form::{closed_form_d_ij, closed_form_nc, closed_form_td_ij, ClosedForm, ExtraT};
pub use engine::{
    pair_eval, pair_eval_batch, pair_eval_traced, pair_monomial, reduce_monomial, MonomialTrace,
    Reduced, Step, DELTA_SELF_INTERSECTION_SIGN,
};
pub use geometry::{BaseGeometry, TowerShape, MAX_TOWER_RANK, OMEGA};
