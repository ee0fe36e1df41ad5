//! Landau levels, Laguerre polynomials and the normalized eigenfunctions.
//!
//! ```bash
//! cargo run -p landau-vws --example landau_basis
//! ```

use landau_vws::spectral_basis::{
    eigen_residual, eigenvalue, laguerre_recurrence, laguerre_sum, BasisParams, Component, NormalizedBasis, SpectralIndex,
};

fn main() -> landau_vws::error::Result<()> {
    println!("L_n^(alpha)(t): exact sum vs recurrence");
    for (n, alpha, t) in [(2, 1.0, 1.0), (10, 3.0, 12.5), (20, 0.0, 50.0)] {
        let exact = laguerre_sum(n, alpha, t)?;
        let rec = laguerre_recurrence(n, alpha, t);
        println!("  n={n:2} alpha={alpha} t={t:5}: {exact:+.15e}  {rec:+.15e}");
    }

    let params = BasisParams::new(1.0)?;
    println!("Landau levels for B = 1: {:?}", (0..5).map(|n| eigenvalue(n, params)).collect::<Vec<_>>());

    let basis = NormalizedBasis::with_default_grid(params)?;
    for (j, n) in [(0, 0), (2, 1), (0, 2)] {
        let xi = SpectralIndex::new(j, n);
        let norm = basis.norm(Component::One, xi)?;
        let r = eigen_residual(Component::One, xi, params, basis.grid(), 1e-3)?;
        println!("e1{xi}: raw L2 norm {norm:.12}, FD eigen-residual {r:.3e}");
    }
    println!("e1(0,0) at the origin: {:.12}", basis.eval(Component::One, SpectralIndex::new(0, 0), 0.0, 0.0)?.re);
    Ok(())
}
