use f2core::primitive::{
    cohen_form, complete_to_basis, is_basis, is_basis_by_commutator, is_primitive, Automorphism, PairMove, Vertex,
};
use f2core::word::{conjugacy_equal, tile_profile, Gen, Letter, Word};
use proptest::prelude::*;

fn letter() -> impl Strategy<Value = Letter> {
    prop_oneof![Just(Letter::A), Just(Letter::A_INV), Just(Letter::B), Just(Letter::B_INV)]
}

fn word(max: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec(letter(), 0..=max).prop_map(Word::reduce)
}

fn automorphism(max: usize) -> impl Strategy<Value = Automorphism> {
    prop::collection::vec(0usize..8, 0..=max).prop_map(|moves| {
        moves.into_iter().fold(Automorphism::identity(), |acc, i| acc.compose(&PairMove::ALL[i].as_automorphism()))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn reduce_is_idempotent(raw in prop::collection::vec(letter(), 0..30)) {
        let w = Word::reduce(raw);
        prop_assert_eq!(Word::reduce(w.to_letters()), w);
    }

    #[test]
    fn inverse_and_length(u in word(12), v in word(12)) {
        prop_assert!(u.mul(&u.inverse()).is_identity());
        prop_assert!(u.mul(&v).len() <= u.len() + v.len());
    }

    #[test]
    fn conjugation_is_an_action(u in word(8), g in word(6), h in word(6)) {
        prop_assert_eq!(u.conjugate(&g.mul(&h)), u.conjugate(&g).conjugate(&h));
    }

    #[test]
    fn cyclic_reduce_witness(u in word(16)) {
        let (core, g) = u.cyclic_reduce();
        prop_assert_eq!(core.to_word().conjugate(&g), u);
        prop_assert!(core.to_word().is_cyclically_reduced());
    }

    #[test]
    fn conjugacy_is_an_equivalence(u in word(8), g in word(5), h in word(5)) {
        let v = u.conjugate(&g);
        let x = v.conjugate(&h);
        prop_assert!(conjugacy_equal(&u, &u));
        prop_assert_eq!(conjugacy_equal(&u, &v), conjugacy_equal(&v, &u));
        prop_assert!(conjugacy_equal(&u, &x));
    }

    #[test]
    fn tile_count(u in word(16)) {
        let p = tile_profile(&u);
        prop_assert_eq!(p.a_length, u.a_length());
        prop_assert_eq!(p.tiles.len(), p.a_length + 1);
    }

    #[test]
    fn a_length_invariant_under_b_conjugation(u in word(12), j in -4i32..=4) {
        prop_assume!(u.first_letter().map(|l| l.gen) == Some(Gen::A));
        let conj = u.conjugate(&Word::power(Gen::B, j));
        // Normalization drops the outer b-powers introduced by the conjugation.
        let (core, _) = conj.cyclic_reduce();
        let (core_u, _) = u.cyclic_reduce();
        prop_assert_eq!(core.to_word().a_length(), core_u.to_word().a_length());
    }

    #[test]
    fn nielsen_agrees_with_commutator_on_bases(s in automorphism(14)) {
        prop_assert!(is_basis(&s.image_a, &s.image_b));
        prop_assert!(is_basis_by_commutator(&s.image_a, &s.image_b));
    }

    #[test]
    fn nielsen_agrees_with_commutator_on_random_pairs(u in word(12), v in word(12)) {
        prop_assert_eq!(is_basis(&u, &v), is_basis_by_commutator(&u, &v));
    }

    #[test]
    fn basis_symmetries(s in automorphism(10)) {
        let (u, v) = (s.image_a, s.image_b);
        prop_assert!(is_basis(&v, &u));
        prop_assert!(is_basis(&u.inverse(), &v));
        prop_assert_eq!(Vertex::assume_primitive(&u), Vertex::assume_primitive(&u.inverse()));
    }

    #[test]
    fn primitives_have_cohen_form_and_completion(s in automorphism(10)) {
        let u = s.image_a;
        let (p, cert) = is_primitive(&u);
        prop_assert!(p);
        prop_assert!(cert.verify(&u));
        let core = u.cyclic_reduce().0;
        if core.len() > 1 {
            prop_assert!(cohen_form(&core).is_some(), "{}", u);
        }
        let v = complete_to_basis(&u).unwrap();
        prop_assert!(is_basis(&u, &v));
    }

    #[test]
    fn primitivity_is_conjugation_invariant(u in word(10), g in word(6)) {
        prop_assert_eq!(is_primitive(&u).0, is_primitive(&u.conjugate(&g)).0);
    }

    #[test]
    fn certificates_replay(u in word(14)) {
        let (_, cert) = is_primitive(&u);
        prop_assert!(cert.verify(&u));
    }

    #[test]
    fn automorphism_inverse_roundtrip(s in automorphism(10)) {
        let inv = s.inverse().unwrap();
        prop_assert_eq!(s.compose(&inv), Automorphism::identity());
    }
}
