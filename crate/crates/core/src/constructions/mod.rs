//! Example sets: fat Cantor sets, the non-rigid slab packing with its
//! bi-Lipschitz map, and the greedy locally porous relative Schottky set.

mod cantor;
mod index;
mod nonrigid;
mod porous;

pub use cantor::{fat_cantor, FatCantorSet, Interval, Rational, MAX_CANTOR_DEPTH};
pub use index::BallIndex;
pub use nonrigid::{nonrigid_example, pack_slab, slab_clearance, NonrigidExample, NonrigidParams, SlabPacking};
pub use porous::{
    mobius_chart_point, mobius_image_balls, porosity_check, porous_relative_schottky, sample_in_set, BallDomain,
    BoxDomain, ChartDomain, PorosityReport, PorositySample, PorousSet, PorousStep,
};
