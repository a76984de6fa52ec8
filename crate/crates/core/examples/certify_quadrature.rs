//! Certifies the product quadrature on SU(2): Schur orthogonality on K and
//! ν_ℏ-orthogonality with norms e^{ℏc}/d on K_C, for spins up to 3/2.

use cstlab::group_model::GroupSpec;
use cstlab::irreps::{enumerate_irreps, MatrixElementIndex};
use cstlab::quadrature::{band_of, build_rule, gram_deviation, nu_gram, schur_gram, GridSpec};

fn main() -> cstlab::Result<()> {
    let spec = GroupSpec::su2();
    let labels = enumerate_irreps(&spec, 4.0);
    let index = MatrixElementIndex::all(&labels);
    let grid = GridSpec::recommended(&spec, band_of(&labels));
    for hbar in [0.25, 1.0] {
        let rule = build_rule(&spec, &grid, hbar)?;
        let dims: Vec<f64> = index.iter().map(|p| 1.0 / p.label.dim() as f64).collect();
        let (schur, _, _) = gram_deviation(&schur_gram(&rule, &labels)?, &dims);
        let want: Vec<f64> = index
            .iter()
            .map(|p| (hbar * p.label.casimir()).exp() / p.label.dim() as f64)
            .collect();
        let (nu, a, b) = gram_deviation(&nu_gram(&rule, &spec, hbar, &labels)?, &want);
        println!(
            "hbar = {hbar}: {} nodes, {} matrix elements, Schur {schur:.2e}, nu {nu:.2e} (worst pair {} {},{} / {} {},{})",
            rule.len(),
            index.len(),
            index[a].label,
            index[a].i,
            index[a].j,
            index[b].label,
            index[b].i,
            index[b].j
        );
    }
    Ok(())
}
