//! A Hall-side horizontal family satisfies the heat equation in s: the
//! finite-difference residual falls by 4 when the step halves, while a
//! perturbed family keeps a residual of order one.

use cstlab::cst::PeterWeylVector;
use cstlab::group_model::GroupSpec;
use cstlab::quantization::{horizontal_family, horizontality_check};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> cstlab::Result<()> {
    let spec = GroupSpec::torus(1)?;
    let hbar0 = 1.0;
    let f = PeterWeylVector::random(&spec, 9.0, &mut ChaCha8Rng::seed_from_u64(3));
    let family = horizontal_family(&spec, hbar0, &f, 1.0);
    for ds in [1e-1, 1e-2] {
        let r = horizontality_check(&spec, hbar0, &family, 1.0, ds)?;
        println!(
            "horizontal ds = {ds:.0e}: residual {:.3e}, ratio {:.4}",
            r.residual, r.ratio
        );
    }
    let perturbed = |s: f64| family(s).map_labels(|_| Complex64::new(1.0 + 0.1 * s, 0.0));
    let r = horizontality_check(&spec, hbar0, perturbed, 1.0, 1e-2)?;
    println!("perturbed  ds = 1e-2: residual {:.3e}", r.residual);
    Ok(())
}
