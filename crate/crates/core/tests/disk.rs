//! Continuous fields over the triangulated disk.

use srbench::algebra::{probes, Algebra, Tuple};
use srbench::linalg::{ComplexMatrix, DEFAULT_GAP};
use srbench::stablerank::{dist_to_lg, section_at_level, DistBudget, LowerMethod};
use srbench::Error;

/// The section of `z` at γ = 0.5 cannot exist on the whole disk, since the
/// distance of `z` to the invertibles is 1. It is checked vertex by vertex
/// in the scalar algebra, with `b = z(p)` where that is invertible.
#[test]
fn coordinate_section_holds_pointwise() {
    let disk = Algebra::disk(32, 1).unwrap().into_arc();
    let c = Algebra::full_matrix(1).unwrap().into_arc();
    let gamma = 0.5;
    let z = probes(&disk, 1).remove(0);
    let scalar = |m: &ComplexMatrix| Tuple::from_fibers(c.clone(), 1, 1, vec![m.clone()], 0.0).unwrap();
    let (mut checked, mut skipped) = (0, 0);
    for f in z.fibers() {
        let r = f.get(0, 0).norm();
        let a = scalar(f);
        let b = if r > 1e-3 { a.clone() } else { scalar(&ComplexMatrix::from_real_diag(&[0.2])) };
        match section_at_level(&a, gamma, &b) {
            Ok(sec) => {
                assert!(sec.residual <= 1e-7, "|z| = {r}: residual {}", sec.residual);
                checked += 1;
            }
            Err(Error::Gap { .. }) => {
                assert!((r - gamma).abs() <= DEFAULT_GAP);
                skipped += 1;
            }
            Err(e) => panic!("|z| = {r}: {e}"),
        }
    }
    assert_eq!(checked + skipped, z.fibers().len());
    assert!(checked > 0);
}

#[test]
fn coordinate_distance_at_resolution_64() {
    let disk = Algebra::disk(64, 1).unwrap().into_arc();
    let z = probes(&disk, 1).remove(0);
    let cert = dist_to_lg(&z, &DistBudget::default()).unwrap();
    assert_eq!(cert.lower_method, LowerMethod::Winding);
    assert!(cert.lower >= 0.9 && cert.upper <= 1.0 + 1e-6, "{:?}", cert.summary());
}

#[test]
fn constant_function_is_invertible() {
    let disk = Algebra::disk(16, 1).unwrap().into_arc();
    let one = Tuple::identity(disk, 1).unwrap();
    let cert = dist_to_lg(&one, &DistBudget::default()).unwrap();
    assert_eq!((cert.lower, cert.upper), (0.0, 0.0));
}
