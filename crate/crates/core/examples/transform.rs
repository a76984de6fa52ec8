//! Applies the coherent state transform to a random function on U(1)^2,
//! checks the spectral values against the convolution integral and the
//! Hall norm against the L² norm.

use cstlab::cst::{cst_apply, cst_invert, evaluate_on_kc, hl2_norm_sq, ConvolutionOracle, PeterWeylVector};
use cstlab::group_model::{compose_complex, AlgebraPoint, GroupPoint, GroupSpec};
use cstlab::quadrature::{build_rule, GridSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> cstlab::Result<()> {
    let spec = GroupSpec::torus(2)?;
    let hbar = 0.5;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let f = PeterWeylVector::random(&spec, 5.0, &mut rng);
    let cf = cst_apply(&spec, hbar, &f)?;
    let oracle = ConvolutionOracle::new(&spec, hbar, &f, 1.0)?;
    for _ in 0..4 {
        let g = compose_complex(
            &GroupPoint::random(&spec, &mut rng),
            1.0,
            &AlgebraPoint::random_ball(&spec, &mut rng, 1.0),
        )?;
        let (spectral, convolution) = (evaluate_on_kc(&cf, &g)?, oracle.evaluate(&g)?);
        println!("spectral {spectral:.12}  convolution {convolution:.12}");
    }
    let rule = build_rule(&spec, &GridSpec::recommended(&spec, f.band()), hbar)?;
    let ratio = (hl2_norm_sq(&rule, &spec, hbar, &cf)? / f.coefficient_norm_sq()).sqrt();
    println!("||C f|| / ||f|| = {ratio:.15}");
    println!(
        "inverse round trip {:.2e}",
        cst_invert(&spec, hbar, &cf)?.relative_distance(&f)
    );
    Ok(())
}
