//! Central-difference Wirtinger derivatives of vector-valued functions of a
//! single complex perturbation `w ↦ f(w)`, evaluated at `w = 0`.

use crate::domain::Complex;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stencil {
    ThreePoint,
    FivePoint,
}

fn directional<F>(f: &F, dir: Complex, h: f64, stencil: Stencil) -> Result<Vec<Complex>>
where
    F: Fn(Complex) -> Result<Vec<Complex>>,
{
    let at = |s: f64| f(dir * s);
    Ok(match stencil {
        Stencil::ThreePoint => {
            let (p, m) = (at(h)?, at(-h)?);
            p.iter().zip(&m).map(|(a, b)| (a - b) / (2.0 * h)).collect()
        }
        Stencil::FivePoint => {
            let (p1, m1, p2, m2) = (at(h)?, at(-h)?, at(2.0 * h)?, at(-2.0 * h)?);
            (0..p1.len())
                .map(|i| (-p2[i] + p1[i] * 8.0 - m1[i] * 8.0 + m2[i]) / (12.0 * h))
                .collect()
        }
    })
}

/// Returns `(∂f/∂w, ∂f/∂w̄)` with `∂/∂w = ½(∂_x − i∂_y)`, `∂/∂w̄ = ½(∂_x + i∂_y)`.
pub fn wirtinger<F>(f: F, h: f64, stencil: Stencil) -> Result<(Vec<Complex>, Vec<Complex>)>
where
    F: Fn(Complex) -> Result<Vec<Complex>>,
{
    let dx = directional(&f, Complex::new(1.0, 0.0), h, stencil)?;
    let dy = directional(&f, Complex::new(0.0, 1.0), h, stencil)?;
    let i = Complex::new(0.0, 1.0);
    let holo = dx.iter().zip(&dy).map(|(x, y)| (x - i * y) * 0.5).collect();
    let anti = dx.iter().zip(&dy).map(|(x, y)| (x + i * y) * 0.5).collect();
    Ok((holo, anti))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wirtinger_of_polynomials() {
        let z0 = Complex::new(0.3, -0.2);
        // f(w) = (z0 + w)² · conj(z0 + w)
        let f = |w: Complex| {
            let z = z0 + w;
            Ok(vec![z * z * z.conj()])
        };
        for stencil in [Stencil::ThreePoint, Stencil::FivePoint] {
            let (d, db) = wirtinger(f, 1e-4, stencil).unwrap();
            assert!((d[0] - z0 * z0.conj() * 2.0).norm() < 1e-8);
            assert!((db[0] - z0 * z0).norm() < 1e-8);
        }
    }
}
