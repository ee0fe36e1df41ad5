//! H-Fourier transform of a band-limited field, Plancherel and Sobolev norms.
//!
//! ```bash
//! cargo run -p landau-vws --example h_fourier_round_trip
//! ```

use std::sync::Arc;

use landau_vws::h_fourier::{
    decay_profile, forward_transform, inverse_transform, plancherel_norm, sobolev_norm, PhysicalField, SpectralField,
    TruncationSpec,
};
use landau_vws::spectral_basis::{BasisParams, Component, NormalizedBasis, SpectralIndex};
use num_complex::Complex64;

fn main() -> landau_vws::error::Result<()> {
    let params = BasisParams::new(1.0)?;
    let basis = Arc::new(NormalizedBasis::with_default_grid(params)?);
    let trunc = TruncationSpec::component_one(3, 4);

    let mut fh = SpectralField::zeros(params, trunc.clone());
    for xi in trunc.indices() {
        let w = 1.0 / (1.0 + (xi.j + xi.n) as f64).powi(2);
        fh.set(xi, Component::One, Complex64::new(w, -0.5 * w))?;
    }

    let (b, g) = (basis.clone(), fh.clone());
    let f = PhysicalField::from_fn(move |x, y| inverse_transform(&g, &b, x, y).expect("inverse transform"));
    println!("Plancherel norm {:.12}", plancherel_norm(&fh));
    println!("quadrature L2   {:.12}", f.l2_norm(&basis)?);

    let back = forward_transform(&f, &trunc, &basis)?;
    let err = trunc
        .indices()
        .map(|xi| (back.get(xi, Component::One) - fh.get(xi, Component::One)).norm())
        .fold(0.0, f64::max);
    println!("round-trip coefficient error {err:.3e}");
    for s in [0.0, 1.0, 2.0] {
        println!("||f||_H^{s} = {:.6}", sobolev_norm(&fh, s));
    }
    let profile = decay_profile(&fh)?;
    println!("decay profile: {profile:?}");
    println!("f̂(1,2) = {}", fh.get(SpectralIndex::new(1, 2), Component::One));
    Ok(())
}
