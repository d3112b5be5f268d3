//! The affine generator `dρ/dt = Qρ + B` of the effective master equation.
//!
//! Two independent builders are provided. [`build_constructed`] applies the
//! full master equation to basis density matrices and reads off `Q` and `B`;
//! [`build_transcribed`] writes every matrix element out in closed form. The
//! constructed generator is the reference; any element where the closed form
//! is known to be wrong is listed in the errata file shipped in `data/`.

use std::fmt;
use std::str::FromStr;

use nalgebra::SMatrix;
use serde::{Deserialize, Serialize};

use crate::density::{DensityVector8, Vector8, EE, GG, S, SLOTS};
use crate::error::{Error, Result};
use crate::linalg;
use crate::noise::{build_z, CoeffSet, ZMatrices};
use crate::operators::{coherent_and_dissipative, commutator, hamiltonian, raising, Op3};
use crate::params::AtomParams;
use crate::C64;

pub type Matrix8 = SMatrix<C64, 8, 8>;
pub type Matrix9 = SMatrix<C64, 9, 9>;

/// Real parts at or above this are flagged as not decaying.
pub const STABILITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineGenerator {
    pub q: Matrix8,
    pub b: Vector8,
}

impl AffineGenerator {
    /// `Qv + B`.
    pub fn apply(&self, v: &Vector8) -> Vector8 {
        self.q * v + self.b
    }

    /// The same `Q` with `B = 0`, which propagates fluctuations.
    pub fn homogeneous(&self) -> Self {
        AffineGenerator {
            q: self.q,
            b: Vector8::zeros(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.q.iter().chain(self.b.iter()).all(|z| z.is_finite())
    }
}

/// Right-hand side of the effective master equation on a 3×3 matrix:
/// `−i[H_Λ, ρ] + L_A ρ − ¼([A, [Z₋, ρ]] + [A†, [Z₊, ρ]])` with `A = σ_eg + σ_es`.
pub fn master_equation_rhs(p: &AtomParams, z: &ZMatrices, rho: &Op3) -> Op3 {
    let h = hamiltonian(p);
    let a = raising();
    let noise = commutator(&a, &commutator(&z.z_minus, rho)) + commutator(&a.adjoint(), &commutator(&z.z_plus, rho));
    coherent_and_dissipative(&h, p, rho) - noise * C64::new(0.25, 0.0)
}

fn read_slots(m: &Op3) -> Vector8 {
    Vector8::from_fn(|k, _| {
        let (i, j) = SLOTS[k];
        m[(i, j)]
    })
}

/// Generator obtained by applying the master equation to the affine
/// parametrisation `ρ(v)` with `ρ_ss = 1 − ρ_gg − ρ_ee`.
pub fn build_constructed(p: &AtomParams, coeffs: &CoeffSet) -> AffineGenerator {
    let z = build_z(coeffs);
    let rhs = |v: &Vector8| read_slots(&master_equation_rhs(p, &z, &DensityVector8(*v).to_matrix_unchecked().0));
    let b = rhs(&Vector8::zeros());
    let mut q = Matrix8::zeros();
    for k in 0..8 {
        let mut e = Vector8::zeros();
        e[k] = C64::new(1.0, 0.0);
        q.set_column(k, &(rhs(&e) - b));
    }
    AffineGenerator { q, b }
}

/// The linear master equation on all nine matrix elements, ordered as the
/// eight vector slots followed by `ρ_ss`.
pub fn superoperator9(p: &AtomParams, coeffs: &CoeffSet) -> Matrix9 {
    let z = build_z(coeffs);
    let coords: Vec<(usize, usize)> = SLOTS.iter().copied().chain([(S, S)]).collect();
    let mut l = Matrix9::zeros();
    for (k, &(i, j)) in coords.iter().enumerate() {
        let mut rho = Op3::zeros();
        rho[(i, j)] = C64::new(1.0, 0.0);
        let out = master_equation_rhs(p, &z, &rho);
        for (r, &(a, b)) in coords.iter().enumerate() {
            l[(r, k)] = out[(a, b)];
        }
    }
    l
}

/// Generator written out element by element in closed form.
pub fn build_transcribed(p: &AtomParams, coeffs: &CoeffSet) -> AffineGenerator {
    let (g, gs, o, d) = (p.gamma, p.gamma_sg, p.omega, p.delta);
    let (m, n, h) = (coeffs.m_coef, coeffs.n_coef, coeffs.h_coef);
    let (mc, nc, hc) = (m.conj(), n.conj(), h.conj());
    let c = |re: f64| C64::new(re, 0.0);
    let io = C64::new(0.0, o);
    let id = C64::new(0.0, d);
    let re_h = c(h.re);
    let im_h = C64::new(0.0, h.im);
    let zero = c(0.0);

    #[rustfmt::skip]
    let rows: [[C64; 8]; 8] = [
        [
            c(-gs) - re_h / 2.0, m * 0.75 + io, -h / 4.0, mc * 0.75 - io,
            c(g - gs) + re_h / 2.0, mc / 4.0, -hc / 4.0, m / 4.0,
        ],
        [
            -mc / 2.0 + io, c(-g) + id - hc * 0.75, -mc / 4.0 + io, nc / 2.0,
            -mc / 4.0 - io, nc / 2.0, mc / 4.0, -hc / 4.0,
        ],
        [
            -im_h / 2.0, m * 0.75 + io, (c(-gs) - re_h) / 2.0, mc / 4.0,
            (h + hc * 2.0) / 4.0, mc * 0.75 - io, zero, m / 4.0,
        ],
        [
            -m / 2.0 - io, n / 2.0, m / 4.0, c(-g) - id - h * 0.75,
            -m / 4.0 + io, -h / 4.0, -m / 4.0 - io, n / 2.0,
        ],
        [
            zero, -m - io, re_h / 2.0, -mc + io,
            c(-2.0 * g) - re_h * 1.5, -mc + io, re_h / 2.0, -m - io,
        ],
        [
            (m + io * 2.0) / 2.0, n / 2.0, -m / 4.0 - io, -h / 4.0,
            (m + io * 8.0) / 4.0, -id - h * 0.75 - c(g + gs / 2.0), m / 4.0, n / 2.0,
        ],
        [
            im_h / 2.0, m / 4.0, zero, mc * 0.75 - io,
            (h * 2.0 + hc) / 4.0, mc / 4.0, (c(-gs) - re_h) / 2.0, m * 0.75 + io,
        ],
        [
            (mc - io * 2.0) / 2.0, -hc / 4.0, mc / 4.0, nc / 2.0,
            (mc - io * 8.0) / 4.0, nc / 2.0, -mc / 4.0 + io, id - hc * 0.75 - c(g + gs / 2.0),
        ],
    ];
    let q = Matrix8::from_fn(|r, k| rows[r][k]);
    let b = Vector8::from_column_slice(&[
        c(gs),
        mc / 4.0,
        -hc / 4.0,
        m / 4.0,
        re_h / 2.0,
        -m / 4.0 - io,
        -h / 4.0,
        -mc / 4.0 + io,
    ]);
    AffineGenerator { q, b }
}

/// Column index used in [`GeneratorDiff::worst_index`] for the `B` vector.
pub const B_COLUMN: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneratorDiff {
    pub max_abs: f64,
    /// `(row, col)` of the largest discrepancy; `col == B_COLUMN` means `B`.
    pub worst_index: (usize, usize),
}

fn element(g: &AffineGenerator, row: usize, col: usize) -> C64 {
    if col == B_COLUMN {
        g.b[row]
    } else {
        g.q[(row, col)]
    }
}

fn diff_masked(a: &AffineGenerator, b: &AffineGenerator, skip: impl Fn(usize, usize) -> bool) -> GeneratorDiff {
    let mut out = GeneratorDiff {
        max_abs: 0.0,
        worst_index: (0, 0),
    };
    for row in 0..8 {
        for col in 0..=B_COLUMN {
            if skip(row, col) {
                continue;
            }
            let d = (element(a, row, col) - element(b, row, col)).norm();
            if d > out.max_abs || d.is_nan() {
                out.max_abs = d;
                out.worst_index = (row, col);
            }
        }
    }
    out
}

pub fn compare_generators(a: &AffineGenerator, b: &AffineGenerator) -> GeneratorDiff {
    diff_masked(a, b, |_, _| false)
}

/// Like [`compare_generators`], ignoring entries listed in `errata`.
pub fn compare_with_errata(a: &AffineGenerator, b: &AffineGenerator, errata: &Errata) -> GeneratorDiff {
    diff_masked(a, b, |r, c| errata.contains(r, c))
}

/// Entries where `|a − b| > tol`, as `(row, col, value in a)`.
pub fn find_discrepancies(a: &AffineGenerator, b: &AffineGenerator, tol: f64) -> Vec<(usize, usize, C64)> {
    let mut out = Vec::new();
    for row in 0..8 {
        for col in 0..=B_COLUMN {
            let x = element(a, row, col);
            if (x - element(b, row, col)).norm() > tol {
                out.push((row, col, x));
            }
        }
    }
    out
}

/// One known mismatch between the closed-form matrix and the construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Erratum {
    pub row: usize,
    pub col: usize,
    pub printed_expr: String,
    pub constructed_value: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Errata(pub Vec<Erratum>);

const SHIPPED_ERRATA: &str = include_str!("../data/q_errata.txt");

impl Errata {
    /// The errata list distributed with the crate.
    pub fn shipped() -> Self {
        SHIPPED_ERRATA.parse().expect("shipped errata file is well formed")
    }

    pub fn contains(&self, row: usize, col: usize) -> bool {
        self.0.iter().any(|e| e.row == row && e.col == col)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromStr for Errata {
    type Err = Error;

    /// One `row,col,printed_expr,constructed_value` per line; `#` starts a
    /// comment.
    fn from_str(s: &str) -> Result<Self> {
        let mut out = Vec::new();
        for line in s.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.splitn(4, ',').map(str::trim).collect();
            if fields.len() != 4 {
                return Err(Error::invalid("errata", format!("expected 4 fields in {line:?}")));
            }
            let index = |f: &str| -> Result<usize> {
                f.parse::<usize>()
                    .ok()
                    .filter(|&i| i < 9)
                    .ok_or_else(|| Error::invalid("errata", format!("bad index {f:?}")))
            };
            out.push(Erratum {
                row: index(fields[0])?,
                col: index(fields[1])?,
                printed_expr: fields[2].to_string(),
                constructed_value: fields[3].to_string(),
            });
        }
        Ok(Errata(out))
    }
}

impl fmt::Display for Errata {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.0 {
            writeln!(f, "{},{},{},{}", e.row, e.col, e.printed_expr, e.constructed_value)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilitySpectrum {
    pub eigenvalues: Vec<C64>,
    /// Eigenvalues with real part `≥ −STABILITY_TOL`.
    pub flagged: Vec<C64>,
}

impl StabilitySpectrum {
    pub fn is_stable(&self) -> bool {
        self.flagged.is_empty()
    }

    pub fn max_real(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_modulus(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

pub fn stability_spectrum(g: &AffineGenerator) -> Result<StabilitySpectrum> {
    let mut eigenvalues = linalg::eigenvalues(&g.q)?;
    eigenvalues.sort_by(|a, b| b.re.total_cmp(&a.re).then(a.im.total_cmp(&b.im)));
    let flagged = eigenvalues.iter().copied().filter(|z| z.re >= -STABILITY_TOL).collect();
    Ok(StabilitySpectrum { eigenvalues, flagged })
}

/// Both populations that stay in the 8-vector.
pub const POPULATION_SLOTS: [usize; 2] = [GG, EE];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{CONJUGATE_PAIRS, EG, ES, GE, GS, SE, SG};
    use crate::linalg::max_abs;
    use crate::noise::compute_coeffs;
    use crate::params::NoiseParams;
    use proptest::prelude::*;

    fn setup(omega: f64, delta: f64, dd: f64, eta: f64) -> (AtomParams, CoeffSet) {
        let p = AtomParams::new(omega, delta);
        (p, compute_coeffs(&p, &NoiseParams::new(dd, eta)))
    }

    #[test]
    fn pure_decay_structure() {
        let p = AtomParams {
            gamma: 1.0,
            gamma_sg: 1e-3,
            omega: 0.0,
            delta: 0.0,
            mu_sq: 1.0,
        };
        let g = build_constructed(&p, &compute_coeffs(&p, &NoiseParams::noiseless()));
        assert!((g.q[(EE, EE)] - C64::new(-2.0 * p.gamma, 0.0)).norm() < 1e-15);
        // ρ_gg gains γρ_ee from decay and loses γ_sg ρ_ee through the ρ_ss closure
        assert!((g.q[(GG, EE)] - C64::new(p.gamma - p.gamma_sg, 0.0)).norm() < 1e-15);
        // populations do not talk to coherences
        for &pop in &POPULATION_SLOTS {
            for coh in [GE, GS, EG, ES, SG, SE] {
                assert_eq!(g.q[(pop, coh)], C64::new(0.0, 0.0));
                assert_eq!(g.q[(coh, pop)], C64::new(0.0, 0.0));
            }
        }
        let spec = stability_spectrum(&g).unwrap();
        assert!(spec
            .eigenvalues
            .iter()
            .any(|z| (z - C64::new(-2.0, 0.0)).norm() < 1e-10));
    }

    #[test]
    fn dark_state_is_stationary_without_noise_or_relaxation() {
        let p = AtomParams::new(100.0, 20.0).with_gamma_sg(0.0);
        let g = build_constructed(&p, &CoeffSet::zero());
        let mut dark = Vector8::zeros();
        dark[GG] = C64::new(0.5, 0.0);
        dark[GS] = C64::new(-0.5, 0.0);
        dark[SG] = C64::new(-0.5, 0.0);
        assert!(max_abs(&g.apply(&dark)) < 1e-12);

        // decay pumps everything into the dark state, so it is the unique fixed point
        let spec = stability_spectrum(&g).unwrap();
        assert!(spec.flagged.is_empty(), "{:?}", spec.eigenvalues);
        assert!(spec.is_stable());
    }

    #[test]
    fn vanishing_generator_is_flagged() {
        let g = AffineGenerator {
            q: Matrix8::zeros(),
            b: Vector8::zeros(),
        };
        let spec = stability_spectrum(&g).unwrap();
        assert_eq!(spec.flagged.len(), 8);
        assert!(!spec.is_stable());
    }

    #[test]
    fn constant_vector_entries() {
        for (o, d, dd, eta) in [(100.0, 20.0, 30.0, 20.0), (50.0, -10.0, 5.0, -300.0)] {
            let (p, c) = setup(o, d, dd, eta);
            let g = build_constructed(&p, &c);
            assert!((g.b[0] - C64::new(p.gamma_sg, 0.0)).norm() < 1e-14);
            let want = -c.m_coef / 4.0 - C64::new(0.0, p.omega);
            assert!((g.b[5] - want).norm() < 1e-12);
        }
    }

    #[test]
    fn transcribed_noise_free_entries() {
        let (p, c) = setup(80.0, 15.0, 0.0, 0.0);
        let t = build_transcribed(&p, &c);
        assert_eq!(t.q[(EE, EE)], C64::new(-2.0 * p.gamma, 0.0));
        assert_eq!(t.q[(GE, GE)], C64::new(-p.gamma, p.delta));
        assert_eq!(t.b[EE], C64::new(0.0, 0.0));
        let (p, c) = setup(80.0, 15.0, 40.0, 7.0);
        let t = build_transcribed(&p, &c);
        assert!((t.q[(EE, EE)] - C64::new(-2.0 * p.gamma - 1.5 * c.h_coef.re, 0.0)).norm() < 1e-14);
        let want = [
            C64::new(p.gamma_sg, 0.0),
            c.m_coef.conj() / 4.0,
            -c.h_coef.conj() / 4.0,
            c.m_coef / 4.0,
            C64::new(c.h_coef.re / 2.0, 0.0),
            -c.m_coef / 4.0 - C64::new(0.0, p.omega),
            -c.h_coef / 4.0,
            -c.m_coef.conj() / 4.0 + C64::new(0.0, p.omega),
        ];
        for k in 0..8 {
            assert!((t.b[k] - want[k]).norm() < 1e-14);
        }
    }

    #[test]
    fn builders_agree() {
        for (o, d, dd, eta) in [
            (100.0, 20.0, 0.0, 0.0),
            (100.0, 20.0, 30.0, 20.0),
            (300.0, 150.0, 70.0, -400.0),
        ] {
            let (p, c) = setup(o, d, dd, eta);
            let diff = compare_generators(&build_constructed(&p, &c), &build_transcribed(&p, &c));
            assert!(diff.max_abs <= 1e-12, "{diff:?}");
        }
    }

    #[test]
    fn compare_identical_is_zero() {
        let (p, c) = setup(100.0, 20.0, 30.0, 20.0);
        let g = build_constructed(&p, &c);
        assert_eq!(compare_generators(&g, &g).max_abs, 0.0);
    }

    #[test]
    fn errata_mask_and_parse() {
        let (p, c) = setup(100.0, 20.0, 30.0, 20.0);
        let a = build_constructed(&p, &c);
        let mut b = a;
        b.q[(2, 4)] += C64::new(1.0, 0.0);
        b.b[6] += C64::new(0.0, 0.5);
        let diff = compare_generators(&a, &b);
        assert_eq!(diff.worst_index, (2, 4));
        assert_eq!(diff.max_abs, 1.0);
        let found = find_discrepancies(&a, &b, 1e-12);
        assert_eq!(found.len(), 2);
        assert_eq!((found[1].0, found[1].1), (6, B_COLUMN));

        let errata: Errata = "# header\n2,4,(H+2H*)/4,demo\n6,8, -H/4 , demo # trailing\n"
            .parse()
            .unwrap();
        assert_eq!(errata.len(), 2);
        assert_eq!(errata.0[1].printed_expr, "-H/4");
        assert_eq!(compare_with_errata(&a, &b, &errata).max_abs, 0.0);
        assert_eq!(errata.to_string().parse::<Errata>().unwrap(), errata);

        assert!("1,2,3".parse::<Errata>().is_err());
        assert!("9,0,x,y".parse::<Errata>().is_err());
    }

    #[test]
    fn shipped_errata_is_exact() {
        // every listed entry must be a real discrepancy, and nothing else may be
        let (p, c) = setup(100.0, 20.0, 30.0, 20.0);
        let a = build_constructed(&p, &c);
        let b = build_transcribed(&p, &c);
        let errata = Errata::shipped();
        let found = find_discrepancies(&a, &b, 1e-12);
        assert_eq!(found.len(), errata.len());
        for (r, col, _) in found {
            assert!(errata.contains(r, col));
        }
    }

    #[test]
    fn stable_at_physical_defaults() {
        let (p, c) = setup(100.0, 0.0, 10.0, 0.0);
        let spec = stability_spectrum(&build_constructed(&p, &c)).unwrap();
        assert_eq!(spec.eigenvalues.len(), 8);
        assert!(spec.max_real() < 0.0);
        assert!(spec.is_stable());
    }

    fn paired(x: &[f64]) -> Vector8 {
        let mut v = Vector8::zeros();
        v[GG] = C64::new(x[0], 0.0);
        v[EE] = C64::new(x[1], 0.0);
        for (k, &(a, b)) in CONJUGATE_PAIRS.iter().enumerate() {
            v[a] = C64::new(x[2 + 2 * k], x[3 + 2 * k]);
            v[b] = v[a].conj();
        }
        v
    }

    proptest! {
        #[test]
        fn twenty_random_sets_agree(
            omega in 1.0f64..400.0, delta in -200.0f64..200.0, dd in 0.0f64..100.0,
            kappa in 5.0f64..200.0, eta in -600.0f64..600.0, gamma in 0.1f64..5.0, gamma_sg in 0.0f64..0.1,
        ) {
            let p = AtomParams::new(omega, delta).with_gamma(gamma).with_gamma_sg(gamma_sg);
            let c = compute_coeffs(&p, &NoiseParams::new(dd, eta).with_kappa(kappa));
            let diff = compare_generators(&build_constructed(&p, &c), &build_transcribed(&p, &c));
            prop_assert!(diff.max_abs <= 1e-12, "{:?}", diff);
        }

        #[test]
        fn evolution_preserves_hermiticity(
            x in proptest::collection::vec(-1.0f64..1.0, 8),
            omega in 1.0f64..300.0, delta in -100.0f64..100.0, dd in 0.0f64..80.0, eta in -300.0f64..300.0,
        ) {
            let (p, c) = setup(omega, delta, dd, eta);
            let g = build_constructed(&p, &c);
            let out = DensityVector8(g.apply(&paired(&x)));
            prop_assert!(out.pairing_error() <= 1e-10);
        }

        #[test]
        fn trace_functional_is_annihilated(
            x in proptest::collection::vec(-1.0f64..1.0, 8),
            omega in 1.0f64..300.0, delta in -100.0f64..100.0, dd in 0.0f64..80.0, eta in -300.0f64..300.0,
        ) {
            let (p, c) = setup(omega, delta, dd, eta);
            let l9 = superoperator9(&p, &c);
            for k in 0..9 {
                let t = l9[(0, k)] + l9[(EE, k)] + l9[(8, k)];
                prop_assert!(t.norm() <= 1e-11);
            }
            // ρ_ss rate from the 9-dim map equals −(ρ̇_gg + ρ̇_ee) from the affine one
            let v = paired(&x);
            let g = build_constructed(&p, &c);
            let dv = g.apply(&v);
            let mut full = nalgebra::SVector::<C64, 9>::zeros();
            for k in 0..8 { full[k] = v[k]; }
            full[8] = C64::new(1.0, 0.0) - v[GG] - v[EE];
            let dfull = l9 * full;
            prop_assert!((dfull[8] + dv[GG] + dv[EE]).norm() <= 1e-10);
            for k in 0..8 {
                prop_assert!((dfull[k] - dv[k]).norm() <= 1e-10);
            }
        }

        #[test]
        fn noise_part_is_linear_in_strength(omega in 10.0f64..300.0, delta in -100.0f64..100.0, dd in 0.5f64..50.0, eta in -100.0f64..100.0) {
            let p = AtomParams::new(omega, delta);
            let wide = |d: f64| compute_coeffs(&p, &NoiseParams::new(d, eta).with_kappa(1e9));
            let base = build_constructed(&p, &CoeffSet::zero());
            let one = build_constructed(&p, &wide(dd));
            let two = build_constructed(&p, &wide(2.0 * dd));
            let d1 = one.q - base.q;
            let d2 = two.q - base.q;
            prop_assert!(max_abs(&(d2 - d1 * C64::new(2.0, 0.0))) <= 1e-9 * dd);
        }
    }
}
