//! Tabulates the SU(2) heat kernel along a one-parameter subgroup and its
//! analytic continuation along the imaginary direction.

use cstlab::cst::HeatKernel;
use cstlab::group_model::{compose_complex, AlgebraPoint, GroupPoint, GroupSpec};

fn main() -> cstlab::Result<()> {
    let spec = GroupSpec::su2();
    let kernel = HeatKernel::new(&spec, 0.5)?;
    println!("cutoff c <= {}, dropped tail {:.1e}", kernel.cutoff(), kernel.tail());
    let e = GroupPoint::identity(&spec);
    for i in 0..=6 {
        let t = std::f64::consts::PI * i as f64 / 4.0;
        let real = kernel.evaluate(&e.mul_exp(&AlgebraPoint::new(vec![0.0, 0.0, t])).embed())?;
        let imag = kernel.evaluate(&compose_complex(&e, 1.0, &AlgebraPoint::new(vec![0.0, 0.0, t / 4.0]))?)?;
        println!(
            "t = {t:5.3}  rho(exp tX3) = {:>14.6e}  rho(exp i(t/4)X3) = {:>14.6e}",
            real.re, imag.re
        );
    }
    Ok(())
}
