//! Crossover and mutation operators.

use rand::Rng;
use rand_distr::{Distribution, Geometric, Normal};

use super::ppm::PpmModel;
use super::SearchConfig;
use crate::alphabet::Alphabet;
use crate::distortion::Metric;

/// Draw from a geometric distribution on `{0, 1, 2, ...}` with the given mean.
pub fn geometric<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> usize {
    let p = 1.0 / (1.0 + mean);
    Geometric::new(p).unwrap().sample(rng) as usize
}

/// Lengths `(|x1|, |x2|)` of a random three-way split of a length-`len`
/// object: `|x1|` uniform on `0..=len`, `|x2|` geometric truncated to the
/// remaining suffix.
pub fn random_split<R: Rng + ?Sized>(len: usize, mean: f64, rng: &mut R) -> (usize, usize) {
    let head = rng.random_range(0..=len);
    let middle = geometric(mean, rng).min(len - head);
    (head, middle)
}

/// `round(a * num / den)` with halves rounded up.
fn scale_round(a: usize, num: usize, den: usize) -> usize {
    ((2 * a as u128 * num as u128 + den as u128) / (2 * den as u128)) as usize
}

/// Crossover with pinned split lengths for `x`. The split of `y` is
/// proportional: `|y1| = round(|x1| |y| / |x|)` and
/// `|y1| + |y2| = round((|x1| + |x2|) |y| / |x|)`.
pub fn crossover_at(x: &[u8], y: &[u8], head: usize, middle: usize) -> Vec<u8> {
    assert!(!x.is_empty() && head + middle <= x.len());
    let y_head = scale_round(head, y.len(), x.len());
    let y_end = scale_round(head + middle, y.len(), x.len());
    let mut out = Vec::with_capacity(x.len() - middle + (y_end - y_head));
    out.extend_from_slice(&x[..head]);
    out.extend_from_slice(&y[y_head..y_end]);
    out.extend_from_slice(&x[head + middle..]);
    out
}

/// `x1 ++ y2 ++ x3` for a random split of `x` and the proportional split of `y`.
pub fn crossover<R: Rng + ?Sized>(x: &[u8], y: &[u8], mean: f64, rng: &mut R) -> Vec<u8> {
    let (head, middle) = random_split(x.len(), mean, rng);
    crossover_at(x, y, head, middle)
}

/// Changes exactly one position according to the metric's mutator. Edit
/// mutation changes, inserts or deletes one byte; a length-1 object is never
/// deleted down to nothing.
pub fn small_mutation<R: Rng + ?Sized>(
    x: &[u8],
    metric: Metric,
    alphabet: &Alphabet,
    sigma: f64,
    rng: &mut R,
) -> Vec<u8> {
    let mut out = x.to_vec();
    match metric {
        Metric::Hamming => {
            let i = rng.random_range(0..out.len());
            out[i] = alphabet.random_symbol(rng);
        }
        Metric::Euclidean => {
            let i = rng.random_range(0..out.len());
            let delta = Normal::new(0.0, sigma).unwrap().sample(rng).round() as i64;
            let v = (out[i] as i64 + delta).clamp(0, 255);
            out[i] = if alphabet.is_full() {
                v as u8
            } else {
                alphabet.nearest(v)
            };
        }
        Metric::Edit => {
            let ops = if out.len() > 1 { 3 } else { 2 };
            match rng.random_range(0..ops) {
                0 => {
                    let i = rng.random_range(0..out.len());
                    out[i] = alphabet.random_symbol(rng);
                }
                1 => {
                    let i = rng.random_range(0..=out.len());
                    out.insert(i, alphabet.random_symbol(rng));
                }
                _ => {
                    let i = rng.random_range(0..out.len());
                    out.remove(i);
                }
            }
        }
    }
    out
}

/// Replaces a geometric-length block after a uniform prefix with a sample
/// from an order-3 PPM model trained on that prefix.
pub fn ppm_mutation<R: Rng + ?Sized>(x: &[u8], alphabet: &Alphabet, mean: f64, rng: &mut R) -> Vec<u8> {
    let (head, middle) = random_split(x.len(), mean, rng);
    ppm_mutation_at(x, alphabet, head, middle, rng)
}

pub fn ppm_mutation_at<R: Rng + ?Sized>(
    x: &[u8],
    alphabet: &Alphabet,
    head: usize,
    middle: usize,
    rng: &mut R,
) -> Vec<u8> {
    let prefix = &x[..head];
    let model = PpmModel::train_with_alphabet(prefix, alphabet.clone());
    let block = model.sample(prefix, middle, rng);
    let mut out = Vec::with_capacity(x.len());
    out.extend_from_slice(prefix);
    out.extend_from_slice(&block);
    out.extend_from_slice(&x[head + middle..]);
    out
}

/// Small mutation with probability `small_mutation_prob`, PPM block
/// resampling otherwise.
pub fn mutate<R: Rng + ?Sized>(
    x: &[u8],
    metric: Metric,
    alphabet: &Alphabet,
    config: &SearchConfig,
    rng: &mut R,
) -> Vec<u8> {
    if rng.random_bool(config.small_mutation_prob) {
        small_mutation(x, metric, alphabet, config.gaussian_sigma, rng)
    } else {
        ppm_mutation(x, alphabet, config.geometric_mean, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distortion::hamming;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn crossover_pinned_split() {
        assert_eq!(crossover_at(b"ABCDEF", b"abcdef", 2, 3), b"ABcdeF");
        assert_eq!(crossover_at(b"ABCDEF", b"abcdef", 4, 0), b"ABCDEF");
    }

    #[test]
    fn crossover_proportional_lengths() {
        // |x| = 4, |y| = 8: head 1 -> y_head 2, end 3 -> y_end 6.
        assert_eq!(crossover_at(b"WXYZ", b"abcdefgh", 1, 2), b"WcdefZ");
    }

    #[test]
    fn crossover_equal_lengths_preserve_length() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..2000 {
            let n = rng.random_range(1..50);
            let x: Vec<u8> = (0..n).map(|_| rng.random()).collect();
            let y: Vec<u8> = (0..n).map(|_| rng.random()).collect();
            assert_eq!(crossover(&x, &y, 5.0, &mut rng).len(), n);
        }
    }

    #[test]
    fn geometric_mean_is_five() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 200_000;
        let mean = (0..n).map(|_| geometric(5.0, &mut rng)).sum::<usize>() as f64 / n as f64;
        // sd of the mean ~ sqrt(30 / n) ~ 0.012
        assert!((mean - 5.0).abs() < 0.06, "{mean}");
    }

    #[test]
    fn hamming_small_mutation_changes_at_most_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = b"a fairly ordinary byte string".to_vec();
        for _ in 0..1000 {
            let y = small_mutation(&x, Metric::Hamming, &Alphabet::bytes(), 10.0, &mut rng);
            assert!(hamming(&x, &y).unwrap() <= 1);
        }
    }

    #[test]
    fn euclidean_small_mutation_stays_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let x = vec![0u8, 255, 128, 3];
        for _ in 0..1000 {
            let y = small_mutation(&x, Metric::Euclidean, &Alphabet::bytes(), 10.0, &mut rng);
            assert_eq!(y.len(), x.len());
            assert!(hamming(&x, &y).unwrap() <= 1);
        }
    }

    #[test]
    fn edit_small_mutation_length_changes_by_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = b"edit me".to_vec();
        for _ in 0..1000 {
            let y = small_mutation(&x, Metric::Edit, &Alphabet::bytes(), 10.0, &mut rng);
            assert!((x.len() - 1..=x.len() + 1).contains(&y.len()));
            assert!(crate::distortion::edit(&x, &y) <= 1);
        }
        for _ in 0..100 {
            let y = small_mutation(b"z", Metric::Edit, &Alphabet::bytes(), 10.0, &mut rng);
            assert!(!y.is_empty());
        }
    }

    #[test]
    fn ppm_block_stays_periodic() {
        let x = b"ab".repeat(1000);
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let trials = 1000;
        let mut periodic = 0;
        let mut uniform_baseline = 0.0;
        for _ in 0..trials {
            let (head, middle) = random_split(x.len(), 5.0, &mut rng);
            let y = ppm_mutation_at(&x, &Alphabet::bytes(), head, middle, &mut rng);
            assert_eq!(y.len(), x.len());
            if y == x {
                periodic += 1;
            }
            uniform_baseline += 2f64.powi(-(middle as i32));
        }
        let frac = periodic as f64 / trials as f64;
        let baseline = uniform_baseline / trials as f64;
        assert!(frac > 0.9, "{frac}");
        assert!(frac > 3.0 * baseline, "{frac} vs {baseline}");
    }
}
