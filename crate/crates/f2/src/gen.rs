//! Seeded generators. Primitive vertices are images of `a` under random
//! products of elementary Nielsen automorphisms; negative cases use plain
//! random reduced words.

use f2core::primitive::PairMove;
use f2core::word::{Gen, Letter};
use f2core::{Automorphism, Vertex, Word};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The generator for trial `trial` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// A product of at most `max_len` elementary Nielsen automorphisms.
pub fn random_automorphism<R: Rng>(rng: &mut R, max_len: usize) -> Automorphism {
    let len = rng.gen_range(0..=max_len);
    (0..len).fold(Automorphism::identity(), |acc, _| {
        acc.compose(&PairMove::ALL.choose(rng).expect("nonempty").as_automorphism())
    })
}

pub fn random_primitive(seed: u64, max_aut_len: usize) -> Word {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_automorphism(&mut rng, max_aut_len).image_a
}

/// A random basis `(φ(a), φ(b))` as a pair of vertices.
pub fn random_basis<R: Rng>(rng: &mut R, max_len: usize) -> (Vertex, Vertex) {
    let phi = random_automorphism(rng, max_len);
    (Vertex::assume_primitive(&phi.image_a), Vertex::assume_primitive(&phi.image_b))
}

pub fn random_vertex<R: Rng>(rng: &mut R, max_len: usize) -> Vertex {
    random_basis(rng, max_len).0
}

/// A reduced word of length at most `max_len`.
pub fn random_word<R: Rng>(rng: &mut R, max_len: usize) -> Word {
    let len = rng.gen_range(0..=max_len);
    let letters = [Letter::A, Letter::A_INV, Letter::B, Letter::B_INV];
    let mut out: Vec<Letter> = Vec::with_capacity(len);
    while out.len() < len {
        let l = *letters.choose(rng).expect("nonempty");
        if out.last() != Some(&l.inv()) {
            out.push(l);
        }
    }
    Word::reduce(out)
}

/// `a^{k_1} b^{m_1} ⋯ a^{k_r} b^{m_r}` with nonzero `k_i`, `Σ|k_i| ≤ a_len`
/// and `|m_i| ≤ b_max`.
pub fn random_conjugator<R: Rng>(rng: &mut R, a_len: usize, b_max: i32) -> Word {
    let mut left = rng.gen_range(0..=a_len) as i32;
    let mut syllables = Vec::new();
    while left > 0 {
        let k = rng.gen_range(1..=left);
        left -= k;
        let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
        syllables.push((Gen::A, sign * k));
        let m = rng.gen_range(-b_max..=b_max);
        // A zero b-exponent would merge neighbouring a-syllables.
        let m = if m == 0 && left > 0 { 1 } else { m };
        syllables.push((Gen::B, m));
    }
    Word::from_syllables(syllables)
}

#[cfg(test)]
mod tests {
    use super::*;
    use f2core::primitive::is_primitive;

    #[test]
    fn primitives() {
        assert_eq!(random_primitive(7, 0), Word::a());
        assert_eq!(random_primitive(7, 12), random_primitive(7, 12));
        for seed in 0..50 {
            assert!(is_primitive(&random_primitive(seed, 12)).0);
        }
    }

    #[test]
    fn conjugators_have_the_requested_a_length() {
        let mut rng = trial_rng(1, 0);
        for _ in 0..100 {
            let g = random_conjugator(&mut rng, 10, 2);
            assert!(g.a_length() <= 10);
        }
    }
}
