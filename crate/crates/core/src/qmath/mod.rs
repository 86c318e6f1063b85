//! Dense complex linear algebra over tensor-factored Hilbert spaces.
//!
//! Eigen-decompositions are delegated to nalgebra's Hermitian solver. All
//! operators are immutable values; functions here are pure.

mod density;
mod layout;
mod matrix;
mod unitary;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

pub use density::{DensityOperator, HERMITIAN_TOL, PSD_TOL, TRACE_TOL};
pub use layout::SubsystemLayout;
pub use matrix::{tensor_product, ComplexMatrix, C64};
pub use unitary::{unitarity_defect, UnitaryOperator, UNITARITY_TOL};

pub(crate) use matrix::{parse_dim, parse_entries};

use crate::error::{Error, Result};

/// Reduced operator on the slots named in `keep`, in layout order.
pub fn partial_trace<S: AsRef<str>>(rho: &DensityOperator, keep: &[S]) -> Result<DensityOperator> {
    if keep.is_empty() {
        return Err(Error::InvalidArgument("partial trace must keep at least one slot".into()));
    }
    let layout = rho.layout();
    let kept = layout.positions_of(keep)?;
    let (mat, reduced) = partial_trace_matrix(rho.matrix(), layout, &kept)?;
    Ok(DensityOperator::trusted(mat, reduced))
}

/// Partial trace of an arbitrary (not necessarily positive) operator.
pub fn partial_trace_matrix(
    m: &ComplexMatrix,
    layout: &SubsystemLayout,
    kept: &[usize],
) -> Result<(ComplexMatrix, SubsystemLayout)> {
    if m.dim() != layout.total_dim() {
        return Err(Error::DimensionMismatch {
            expected: layout.total_dim(),
            found: m.dim(),
        });
    }
    let traced: Vec<usize> = (0..layout.len()).filter(|p| !kept.contains(p)).collect();
    let keep_off = layout.offsets(kept);
    let trace_off = layout.offsets(&traced);
    let src = m.inner();
    let k = keep_off.len();
    let mut out = DMatrix::zeros(k, k);
    for (i, &oi) in keep_off.iter().enumerate() {
        for (j, &oj) in keep_off.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for &t in &trace_off {
                acc += src[(oi + t, oj + t)];
            }
            out[(i, j)] = acc;
        }
    }
    Ok((ComplexMatrix::from_inner(out), layout.select(kept)?))
}

/// `U ρ U†`. The result keeps the layout of `rho`.
pub fn apply_unitary(rho: &DensityOperator, u: &UnitaryOperator) -> Result<DensityOperator> {
    if rho.dim() != u.dim() {
        return Err(Error::DimensionMismatch {
            expected: u.dim(),
            found: rho.dim(),
        });
    }
    Ok(DensityOperator::trusted(
        u.conjugate(rho.matrix())?,
        rho.layout().clone(),
    ))
}

/// Half the trace norm of `a − b`.
pub fn trace_distance(a: &DensityOperator, b: &DensityOperator) -> Result<f64> {
    trace_norm_distance(a.matrix(), b.matrix())
}

pub(crate) fn trace_norm_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    let diff = a.sub(b)?;
    let defect = diff.hermiticity_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::NotHermitian(defect));
    }
    let t = 0.5 * diff.eigenvalues().iter().map(|l| l.abs()).sum::<f64>();
    Ok(t.clamp(0.0, 1.0))
}

/// Uhlmann fidelity `(Tr √(√a b √a))²`.
pub fn fidelity(a: &DensityOperator, b: &DensityOperator) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let sqrt_a = a.matrix().map_spectrum(|l| l.max(0.0).sqrt());
    let inner = sqrt_a.matmul(b.matrix())?.matmul(&sqrt_a)?;
    let ev = inner.eigenvalues();
    // Eigenvalues at roundoff level would contribute √ε to the trace.
    let floor = 64.0 * f64::EPSILON * ev.last().copied().unwrap_or(0.0).max(0.0);
    let root: f64 = ev.iter().filter(|&&l| l > floor).map(|l| l.sqrt()).sum();
    Ok((root * root).clamp(0.0, 1.0))
}

/// Euclidean projection of `v` onto the probability simplex.
pub fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, &x) in u.iter().enumerate() {
        cumsum += x;
        let t = (cumsum - 1.0) / (j + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Closest unit-trace PSD operator (Frobenius norm) to the Hermitian part of `m`.
pub fn nearest_density_operator(m: &ComplexMatrix) -> DensityOperator {
    let layout = SubsystemLayout::single("S", m.dim()).expect("nonzero dim");
    let herm = m.hermitian_part();
    let (values, vectors) = herm.hermitian_eigen();
    let tr: f64 = values.iter().sum();
    if values[0] >= 0.0 && (tr - 1.0).abs() <= 1e-14 {
        return DensityOperator::trusted(herm, layout);
    }
    let projected = project_to_simplex(&values);
    DensityOperator::trusted(ComplexMatrix::from_spectrum(&projected, &vectors), layout)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Purity {
    /// Haar-random pure state.
    Pure,
    /// Normalized `G G†` for a complex Ginibre matrix `G`.
    Mixed,
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_state_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<C64> {
    let v: Vec<C64> = (0..d).map(|_| complex_gaussian(rng)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

pub fn random_density_operator<R: Rng + ?Sized>(
    d: usize,
    purity: Purity,
    rng: &mut R,
) -> Result<DensityOperator> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("dimension {d} < 2")));
    }
    let layout = SubsystemLayout::single("S", d)?;
    let mat = match purity {
        Purity::Pure => ComplexMatrix::outer(&random_state_vector(d, rng)),
        Purity::Mixed => {
            let g = DMatrix::from_fn(d, d, |_, _| complex_gaussian(rng));
            let gg = &g * g.adjoint();
            let tr = gg.trace().re;
            ComplexMatrix::from_inner(gg / C64::new(tr, 0.0)).hermitian_part()
        }
    };
    Ok(DensityOperator::trusted(mat, layout))
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn qubit(label: &str) -> SubsystemLayout {
        SubsystemLayout::single(label, 2).unwrap()
    }

    fn ket0() -> DensityOperator {
        DensityOperator::basis_state(qubit("S"), 0).unwrap()
    }

    fn ket1() -> DensityOperator {
        DensityOperator::basis_state(qubit("S"), 1).unwrap()
    }

    fn pi2() -> DensityOperator {
        DensityOperator::maximally_mixed(qubit("S"))
    }

    #[test]
    fn validation_rejects_invalid_states() {
        let l = qubit("S");
        assert!(matches!(
            DensityOperator::new(ComplexMatrix::from_diagonal(&[0.6, 0.6]), l.clone()),
            Err(Error::InvalidTrace(_))
        ));
        assert!(matches!(
            DensityOperator::new(ComplexMatrix::from_diagonal(&[1.1, -0.1]), l.clone()),
            Err(Error::NotPsd(_))
        ));
        let m = ComplexMatrix::from_row_major(
            2,
            &[C64::new(0.5, 0.0), C64::new(0.1, 0.0), C64::new(0.2, 0.0), C64::new(0.5, 0.0)],
        )
        .unwrap();
        assert!(matches!(DensityOperator::new(m, l), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn partial_trace_of_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_density_operator(2, Purity::Mixed, &mut rng).unwrap().relabel("A").unwrap();
        let b = random_density_operator(3, Purity::Mixed, &mut rng).unwrap().relabel("B").unwrap();
        let ab = a.tensor(&b).unwrap();
        let ra = partial_trace(&ab, &["A"]).unwrap();
        assert!(ra.matrix().max_abs_diff(a.matrix()).unwrap() < 1e-15);
        let rb = partial_trace(&ab, &["B"]).unwrap();
        assert!(rb.matrix().max_abs_diff(b.matrix()).unwrap() < 1e-15);
        assert_eq!(rb.layout().labels(), &["B".to_string()]);
    }

    #[test]
    fn partial_trace_of_bell_state() {
        let s = 0.5f64.sqrt();
        let phi = [C64::new(s, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(s, 0.0)];
        let layout = SubsystemLayout::new([("A", 2), ("B", 2)]).unwrap();
        let bell = DensityOperator::pure(&phi, layout).unwrap();
        let r = partial_trace(&bell, &["A"]).unwrap();
        assert!(r.matrix().max_abs_diff(pi2().matrix()).unwrap() < 1e-15);
    }

    #[test]
    fn partial_trace_keeps_original_order_and_rejects_unknown() {
        let layout = SubsystemLayout::new([("A", 2), ("B", 2), ("C", 2)]).unwrap();
        let p = 0.2;
        let rho = DensityOperator::diagonal(&[p, 1.0 - p], qubit("A"))
            .unwrap()
            .tensor(&DensityOperator::maximally_mixed(qubit("B")))
            .unwrap()
            .tensor(&DensityOperator::basis_state(qubit("C"), 1).unwrap())
            .unwrap();
        assert_eq!(rho.layout(), &layout);
        let r = partial_trace(&rho, &["C", "A"]).unwrap();
        assert_eq!(r.layout().labels(), &["A".to_string(), "C".to_string()]);
        let expected = ComplexMatrix::from_diagonal(&[0.0, p, 0.0, 1.0 - p]);
        assert!(r.matrix().max_abs_diff(&expected).unwrap() < 1e-15);
        assert_eq!(partial_trace(&rho, &["Z"]), Err(Error::UnknownSlot("Z".into())));
        assert!(partial_trace::<&str>(&rho, &[]).is_err());
        let a = partial_trace(&rho, &["A"]).unwrap();
        assert!(a.matrix().max_abs_diff(&ComplexMatrix::from_diagonal(&[p, 1.0 - p])).unwrap() < 1e-15);
    }

    #[test]
    fn apply_unitary_examples() {
        let x = UnitaryOperator::permutation(vec![1, 0], qubit("S")).unwrap();
        let out = apply_unitary(&ket0(), &x).unwrap();
        assert_eq!(out.matrix(), ket1().matrix());
        let id = UnitaryOperator::identity(qubit("S"));
        assert_eq!(apply_unitary(&ket0(), &id).unwrap(), ket0());
        let wrong = UnitaryOperator::identity(SubsystemLayout::single("T", 3).unwrap());
        assert!(matches!(apply_unitary(&ket0(), &wrong), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn swap_exchanges_factors() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_density_operator(2, Purity::Mixed, &mut rng).unwrap().relabel("A").unwrap();
        let b = random_density_operator(2, Purity::Pure, &mut rng).unwrap().relabel("B").unwrap();
        let layout = SubsystemLayout::new([("A", 2), ("B", 2)]).unwrap();
        let swap = UnitaryOperator::from_basis_map(layout, |x| vec![x[1], x[0]]).unwrap();
        let out = apply_unitary(&a.tensor(&b).unwrap(), &swap).unwrap();
        let expected = b.tensor(&a.clone().relabel("X").unwrap()).unwrap();
        assert!(out.matrix().max_abs_diff(expected.matrix()).unwrap() < 1e-15);
    }

    #[test]
    fn trace_distance_examples() {
        assert!(trace_distance(&ket0(), &ket0()).unwrap() < 1e-15);
        assert!((trace_distance(&ket0(), &ket1()).unwrap() - 1.0).abs() < 1e-15);
        assert!((trace_distance(&ket0(), &pi2()).unwrap() - 0.5).abs() < 1e-15);
        let big = DensityOperator::maximally_mixed(SubsystemLayout::single("S", 3).unwrap());
        assert!(matches!(trace_distance(&ket0(), &big), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn fidelity_examples() {
        assert!((fidelity(&ket0(), &ket0()).unwrap() - 1.0).abs() < 1e-14);
        assert!(fidelity(&ket0(), &ket1()).unwrap() < 1e-14);
        assert!((fidelity(&ket0(), &pi2()).unwrap() - 0.5).abs() < 1e-14);
        assert!((fidelity(&pi2(), &ket0()).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn nearest_density_examples() {
        let out = nearest_density_operator(&ComplexMatrix::from_diagonal(&[1.1, -0.1]));
        assert!(out.matrix().max_abs_diff(&ComplexMatrix::from_diagonal(&[1.0, 0.0])).unwrap() < 1e-14);
        let out = nearest_density_operator(&ComplexMatrix::from_diagonal(&[0.6, 0.6]));
        assert!(out.matrix().max_abs_diff(&ComplexMatrix::from_diagonal(&[0.5, 0.5])).unwrap() < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let rho = random_density_operator(3, Purity::Mixed, &mut rng).unwrap();
        assert_eq!(nearest_density_operator(rho.matrix()).matrix(), rho.matrix());
    }

    #[test]
    fn nearest_density_matches_grid_search() {
        // Brute force over diag(q, 1−q); off-diagonal terms only add distance.
        let target = [1.1, -0.1];
        let best_q = (0..=100_000)
            .map(|k| k as f64 / 100_000.0)
            .min_by(|&a, &b| {
                let da = (a - target[0]).powi(2) + (1.0 - a - target[1]).powi(2);
                let db = (b - target[0]).powi(2) + (1.0 - b - target[1]).powi(2);
                da.total_cmp(&db)
            })
            .unwrap();
        let out = nearest_density_operator(&ComplexMatrix::from_diagonal(&target));
        assert!((out.matrix().get(0, 0).re - best_q).abs() < 1e-5);
    }

    #[test]
    fn simplex_projection() {
        assert_eq!(project_to_simplex(&[0.2, 0.8]), vec![0.2, 0.8]);
        let p = project_to_simplex(&[2.0, 0.0, 0.0]);
        assert_eq!(p, vec![1.0, 0.0, 0.0]);
        let p = project_to_simplex(&[-1.0, -1.0]);
        assert_eq!(p, vec![0.5, 0.5]);
    }

    #[test]
    fn random_states_are_valid_and_deterministic() {
        for purity in [Purity::Pure, Purity::Mixed] {
            let a = random_density_operator(4, purity, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
            let b = random_density_operator(4, purity, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
            assert_eq!(a, b);
            DensityOperator::new(a.matrix().clone(), a.layout().clone()).unwrap();
        }
        let pure = random_density_operator(3, Purity::Pure, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert!((pure.purity() - 1.0).abs() < 1e-12);
        assert!(random_density_operator(1, Purity::Pure, &mut ChaCha8Rng::seed_from_u64(1)).is_err());
    }
}
