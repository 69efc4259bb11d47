//! The Hom bundle of decomposed bundles and the tangent prolongation.

use mvb::atlas::{AtlasPresentation, FiniteBase};
use mvb::bundle::{hom_bundle, tangent_prolongation};
use mvb::corpus::uniform_twisted;
use mvb::gauge::DimAssignment;

fn main() -> mvb::Result<()> {
    let base = FiniteBase::numbered(1);
    let e = AtlasPresentation::decomposed(&DimAssignment::uniform(2, 1), &base);
    let f = AtlasPresentation::decomposed(&DimAssignment::uniform(2, 2), &base);
    let h = hom_bundle(&e, &f)?;
    println!("Hom: {}-fold, dims {:?}", h.n(), h.dims().iter().collect::<Vec<_>>());
    let a = uniform_twisted(10, 2, 1, 2, 2);
    let t = tangent_prolongation(&a)?;
    println!("tangent prolongation: {}-fold, valid {}", t.n(), t.validate().is_valid());
    Ok(())
}
