//! Log-sizes of distortion spheres and the universal integer code.
//!
//! A distortion sphere `S_y(a)` is the set of objects at distortion exactly
//! `a` from `y`. Its log-size is the cost of pointing at the source object
//! once the representation and the distortion are known. Hamming spheres
//! are counted exactly; Euclidean and edit spheres are bounded from above.

use statrs::function::gamma::ln_gamma;

use crate::distortion::{Distortion, Metric};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exactness {
    Exact,
    UpperBound,
}

/// `log2` of a sphere size, tagged with whether it is exact.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SphereLog {
    pub log2_size: f64,
    pub exactness: Exactness,
}

impl SphereLog {
    fn exact(log2_size: f64) -> Self {
        SphereLog {
            log2_size: log2_size.max(0.0),
            exactness: Exactness::Exact,
        }
    }

    fn upper_bound(log2_size: f64) -> Self {
        SphereLog {
            log2_size: log2_size.max(0.0),
            exactness: Exactness::UpperBound,
        }
    }
}

fn ln_factorial(k: u64) -> f64 {
    ln_gamma(k as f64 + 1.0)
}

fn log2_binomial(n: u64, k: u64) -> f64 {
    debug_assert!(k <= n);
    (ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)) / std::f64::consts::LN_2
}

/// `log2[C(n, a) (alphabet_size - 1)^a]`, the exact Hamming sphere size.
pub fn log_hamming_sphere(n: u64, a: u64, alphabet_size: u64) -> Result<SphereLog> {
    if a > n {
        return Err(Error::Domain(format!(
            "Hamming radius {a} exceeds length {n}"
        )));
    }
    if alphabet_size < 2 {
        return Err(Error::Domain(format!(
            "alphabet size {alphabet_size} is below 2"
        )));
    }
    if a == 0 {
        return Ok(SphereLog::exact(0.0));
    }
    let symbols = a as f64 * ((alphabet_size - 1) as f64).log2();
    Ok(SphereLog::exact(log2_binomial(n, a) + symbols))
}

/// Gaussian-shape bound on `log2 |S(n, a)|` with `a^2 = a_sq > 0`, entries of
/// the difference vector restricted to `-255..=255`.
fn euclid_shape_bound(n: u64, a_sq: u64) -> f64 {
    let scale = n as f64 / (2.0 * a_sq as f64);
    let mass: f64 = (-255i64..=255)
        .map(|d| (-((d * d) as f64) * scale).exp())
        .sum();
    n as f64 * mass.log2() + 0.5 * n as f64 * std::f64::consts::LOG2_E
}

/// Upper bound on the log-size of the Euclidean sphere of squared radius
/// `a_sq` in dimension `n`.
///
/// When `a_sq < n` at least `n - a_sq` entries of any vector on the sphere
/// are zero, so the sphere is also bounded by choosing those positions and
/// bounding the sphere in the remaining `a_sq` dimensions. The smaller of
/// the two bounds is returned.
pub fn log_euclid_sphere_bound(n: u64, a_sq: u64) -> SphereLog {
    if a_sq == 0 {
        return SphereLog::exact(0.0);
    }
    if n == 0 {
        return SphereLog::upper_bound(0.0);
    }
    let direct = euclid_shape_bound(n, a_sq);
    let bound = if a_sq < n {
        let zeros = n - a_sq;
        let refined = log2_binomial(n, zeros) + euclid_shape_bound(a_sq, a_sq);
        direct.min(refined)
    } else {
        direct
    };
    SphereLog::upper_bound(bound)
}

/// Index of the largest multinomial term in the edit-sphere sum, clamped to
/// the summation range `max(0, a - n)..=a`.
pub fn edit_max_term_index(n: u64, a: u64) -> u64 {
    let (nf, af) = (n as f64, a as f64);
    let root = (4.0 * (nf * nf + nf + af * af + af) + 1.0).sqrt();
    let raw = ((2.0 * (af - nf) + 1.0 + root) / 4.0).floor();
    let lo = a.saturating_sub(n);
    (raw.max(0.0) as u64).clamp(lo, a)
}

/// `ln` of the multinomial `(n+i)! / (i! (n-a+i)! (a-i)!)`: the number of
/// edit programs on a length-`n` string with `i` insertions, `a - i`
/// replacements (deletions included) and `n - a + i` copies.
fn ln_edit_term(n: u64, a: u64, i: u64) -> f64 {
    ln_factorial(n + i) - ln_factorial(i) - ln_factorial(n + i - a) - ln_factorial(a - i)
}

/// Upper bound on the log-size of the edit sphere of radius `a` around a
/// string of length `n`: every term of the program-count sum is replaced by
/// the largest one.
pub fn log_edit_sphere_bound(n: u64, a: u64, alphabet_size: u64) -> SphereLog {
    if a == 0 {
        return SphereLog::exact(0.0);
    }
    let lo = a.saturating_sub(n);
    let terms = (a - lo + 1) as f64;
    let peak = ln_edit_term(n, a, edit_max_term_index(n, a)) / std::f64::consts::LN_2;
    let symbols = a as f64 * (alphabet_size as f64).log2();
    SphereLog::upper_bound(terms.log2() + peak + symbols)
}

/// Universal code for non-negative integers,
/// `log2(d + 1) + 2 log2(log2(d + 2) + 1)` bits.
pub fn universal_int_codelength(d: u64) -> f64 {
    let d = d as f64;
    (d + 1.0).log2() + 2.0 * ((d + 2.0).log2() + 1.0).log2()
}

/// Signed front end to [`universal_int_codelength`].
pub fn universal_int_codelength_checked(d: i64) -> Result<f64> {
    u64::try_from(d)
        .map(universal_int_codelength)
        .map_err(|_| Error::Domain(format!("negative integer {d} has no code")))
}

/// Sphere log-size for a distortion value.
///
/// `n` is the sphere dimension: the source length for Hamming and Euclidean,
/// the representation length for edit.
pub fn log_sphere(distortion: Distortion, n: u64, alphabet_size: u64) -> Result<SphereLog> {
    match distortion.metric() {
        Metric::Hamming => log_hamming_sphere(n, distortion.raw(), alphabet_size),
        Metric::Euclidean => Ok(log_euclid_sphere_bound(n, distortion.raw())),
        Metric::Edit => Ok(log_edit_sphere_bound(n, distortion.raw(), alphabet_size)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distortion::edit;

    fn all_strings(alphabet: u8, len: usize) -> Vec<Vec<u8>> {
        let mut out = vec![Vec::new()];
        for _ in 0..len {
            out = out
                .into_iter()
                .flat_map(|s| {
                    (0..alphabet).map(move |c| {
                        let mut t = s.clone();
                        t.push(c);
                        t
                    })
                })
                .collect();
        }
        out
    }

    fn lattice_count(n: u32, a_sq: i64) -> u64 {
        let r = (a_sq as f64).sqrt() as i64 + 1;
        let side = (2 * r + 1) as u64;
        (0..side.pow(n))
            .filter(|&code| {
                let mut c = code;
                let mut sum = 0;
                for _ in 0..n {
                    let v = (c % side) as i64 - r;
                    c /= side;
                    sum += v * v;
                }
                sum == a_sq
            })
            .count() as u64
    }

    fn edit_sphere_count(y: &[u8], a: u64) -> u64 {
        (0..=y.len() + a as usize)
            .flat_map(|len| all_strings(2, len))
            .filter(|s| edit(s, y) == a)
            .count() as u64
    }

    #[test]
    fn hamming_large_sphere() {
        let s = log_hamming_sphere(4096, 377, 2).unwrap();
        assert!((s.log2_size - 1810.0).abs() <= 2.0, "{}", s.log2_size);
        assert_eq!(s.exactness, Exactness::Exact);
    }

    #[test]
    fn hamming_small_cases() {
        assert_eq!(log_hamming_sphere(17, 0, 256).unwrap().log2_size, 0.0);
        let s = log_hamming_sphere(3, 1, 2).unwrap();
        assert!((s.log2_size - 3f64.log2()).abs() < 1e-12);
        assert!(log_hamming_sphere(3, 4, 2).is_err());
        assert!(log_hamming_sphere(3, 1, 1).is_err());
    }

    #[test]
    fn hamming_matches_enumeration() {
        for n in 0..=12usize {
            let strings = all_strings(2, n);
            let centre = vec![0u8; n];
            for a in 0..=n as u64 {
                let count = strings
                    .iter()
                    .filter(|s| crate::distortion::hamming(s, &centre).unwrap() == a)
                    .count() as f64;
                let est = log_hamming_sphere(n as u64, a, 2).unwrap().log2_size.exp2();
                assert!((est - count).abs() / count <= 1e-9, "n={n} a={a}");
            }
        }
    }

    #[test]
    fn euclid_examples() {
        assert_eq!(log_euclid_sphere_bound(5, 0).log2_size, 0.0);

        // Direct summation of the normaliser for n = 1, a^2 = 9.
        let mass: f64 = (-255i64..=255).map(|d| (-(d * d) as f64 / 18.0).exp()).sum();
        let expected = mass.log2() + 0.5 * std::f64::consts::LOG2_E;
        let b = log_euclid_sphere_bound(1, 9);
        assert!((b.log2_size - expected).abs() < 1e-12);
        assert!((b.log2_size.exp2() - 12.4).abs() < 0.05, "{}", b.log2_size.exp2());
        assert_eq!(lattice_count(1, 9), 2);

        assert_eq!(lattice_count(2, 25), 12);
        assert!(log_euclid_sphere_bound(2, 25).log2_size >= 12f64.log2());
    }

    #[test]
    fn euclid_dominates_lattice_counts() {
        for n in 1..=3u32 {
            for a_sq in 0..=25i64 {
                let count = lattice_count(n, a_sq);
                if count == 0 {
                    continue;
                }
                let bound = log_euclid_sphere_bound(n as u64, a_sq as u64).log2_size;
                assert!(bound >= (count as f64).log2() - 1e-9, "n={n} a_sq={a_sq}");
            }
        }
    }

    #[test]
    fn edit_max_term_examples() {
        assert_eq!(edit_max_term_index(1, 1), 1);
        assert_eq!(edit_max_term_index(7, 0), 0);
        let best = (0..=3u64)
            .max_by(|&i, &j| ln_edit_term(5, 3, i).total_cmp(&ln_edit_term(5, 3, j)))
            .unwrap();
        assert_eq!(edit_max_term_index(5, 3), best);
    }

    #[test]
    fn edit_max_term_is_argmax() {
        for n in 0..40u64 {
            for a in 0..40u64 {
                let lo = a.saturating_sub(n);
                let best = (lo..=a)
                    .map(|i| ln_edit_term(n, a, i))
                    .fold(f64::NEG_INFINITY, f64::max);
                let got = ln_edit_term(n, a, edit_max_term_index(n, a));
                assert!((got - best).abs() < 1e-9, "n={n} a={a}");
            }
        }
    }

    #[test]
    fn edit_examples() {
        assert_eq!(log_edit_sphere_bound(2, 0, 2).log2_size, 0.0);

        // Unrelaxed sum for n = 1, a = 1: 2 * (1 + 2) = 6 programs.
        let unrelaxed: f64 = (0..=1u64)
            .map(|i| 2.0 * ln_edit_term(1, 1, i).exp())
            .sum();
        assert!((unrelaxed - 6.0).abs() < 1e-9);
        assert_eq!(edit_sphere_count(&[0], 1), 5);
        let b = log_edit_sphere_bound(1, 1, 2).log2_size;
        assert!(b >= unrelaxed.log2() - 1e-12);

        let aba = [0u8, 1, 0];
        let b = log_edit_sphere_bound(3, 1, 2).log2_size;
        assert!(b.is_finite());
        assert!(b >= (edit_sphere_count(&aba, 1) as f64).log2());
    }

    #[test]
    fn edit_dominates_enumeration() {
        for n in 0..=3usize {
            for y in all_strings(2, n) {
                for a in 0..=2u64 {
                    let count = edit_sphere_count(&y, a);
                    let bound = log_edit_sphere_bound(n as u64, a, 2).log2_size;
                    assert!(bound >= (count as f64).log2() - 1e-9, "{y:?} a={a}");
                }
            }
        }
    }

    #[test]
    fn universal_code_values() {
        assert!((universal_int_codelength(0) - 2.0).abs() < 1e-12);
        let one = 1.0 + 2.0 * (3f64.log2() + 1.0).log2();
        assert!((universal_int_codelength(1) - one).abs() < 1e-12);
        assert!((universal_int_codelength(1) - 3.74).abs() < 0.01);
        assert!(universal_int_codelength(100) < universal_int_codelength(1000));
        assert!(universal_int_codelength_checked(-1).is_err());
        assert_eq!(universal_int_codelength_checked(5).unwrap(), universal_int_codelength(5));
    }

    #[test]
    fn universal_code_is_monotone_and_kraft() {
        let mut prev = universal_int_codelength(0);
        let mut kraft = 0.0;
        for d in 0..=1_000_000u64 {
            let l = universal_int_codelength(d);
            assert!(l >= prev);
            prev = l;
            kraft += (-l).exp2();
        }
        assert!(kraft <= 1.0, "{kraft}");
    }
}
