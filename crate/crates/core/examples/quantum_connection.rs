//! Compares the quantum connection, computed by direct quadrature on T*K,
//! with its spectral form (ℏ₀/2)(c + |ρ|²), and checks that the normalized
//! S-map is unitary and intertwines it with the Hall-side connection.

use cstlab::cst::{hl2_norm_sq, PeterWeylVector};
use cstlab::group_model::GroupSpec;
use cstlab::irreps::{enumerate_irreps, MatrixElementIndex};
use cstlab::quadrature::{band_of, build_rule, GridSpec, QuadratureRule};
use cstlab::quantization::{connection_battery, intertwining_check, quantum_norm, s_isomorphism};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> cstlab::Result<()> {
    let spec = GroupSpec::su2();
    let hbar0 = 1.0;
    let labels = enumerate_irreps(&spec, 2.0);
    let probes = MatrixElementIndex::all(&labels);
    let grid = GridSpec::recommended(&spec, band_of(&labels));
    for s in [0.5, 2.0] {
        let rule = build_rule(&spec, &grid, s * hbar0)?;
        let report = connection_battery(&rule, &spec, s, hbar0, &probes)?;
        println!(
            "s = {s}: {} pairings, max relative error {:.2e}",
            report.rows.len(),
            report.max_rel_err
        );
    }
    let f = PeterWeylVector::random(&spec, 2.0, &mut ChaCha8Rng::seed_from_u64(2));
    let g = PeterWeylVector::random(&spec, 2.0, &mut ChaCha8Rng::seed_from_u64(3));
    for s in [0.5, 2.0] {
        let hall = hl2_norm_sq(&build_rule(&spec, &grid, s * hbar0)?, &spec, s * hbar0, &f)?.sqrt();
        let fiber = QuadratureRule::for_quantum_fiber(&spec, &grid, s, hbar0)?;
        let quantum = quantum_norm(&fiber, &s_isomorphism(&spec, hbar0, s, &f)?)?;
        let tie = intertwining_check(&spec, &grid, hbar0, s, &f, &g)?;
        println!(
            "s = {s}: Hall norm {hall:.12}, quantum norm of S f {:.12}, intertwining error {:.2e}",
            quantum.direct, tie.rel_err
        );
    }
    Ok(())
}
