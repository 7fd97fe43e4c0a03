use heavyhex::circuit::{Component, Kind};
use heavyhex::{Bits, PauliOperator};
use proptest::prelude::*;

const N: usize = 6;

fn pauli() -> impl Strategy<Value = PauliOperator> {
    (prop::collection::vec(any::<bool>(), N), prop::collection::vec(any::<bool>(), N))
        .prop_map(|(x, z)| PauliOperator::from_bits(x, z).unwrap())
}

fn clifford() -> impl Strategy<Value = Component> {
    prop_oneof![
        (1..=N as u32, 1..=N as u32).prop_filter("distinct", |(a, b)| a != b).prop_map(|(a, b)| Component::cx(a, b)),
        (1..=N as u32).prop_map(|q| Component::one(Kind::H, q)),
        (1..=N as u32).prop_map(|q| Component::one(Kind::S, q)),
    ]
}

fn symplectic(a: &PauliOperator, b: &PauliOperator) -> bool {
    (0..N).fold(false, |acc, i| acc ^ (a.x(i) & b.z(i)) ^ (a.z(i) & b.x(i)))
}

proptest! {
    #[test]
    fn product_is_a_group(a in pauli(), b in pauli(), c in pauli()) {
        let ab_c = a.multiply(&b).unwrap().multiply(&c).unwrap();
        let a_bc = a.multiply(&b.multiply(&c).unwrap()).unwrap();
        prop_assert_eq!(ab_c, a_bc);
        prop_assert!(a.multiply(&a).unwrap().is_identity());
        prop_assert_eq!(a.multiply(&b).unwrap(), b.multiply(&a).unwrap());
        prop_assert!(a.multiply(&b).unwrap().weight() <= a.weight() + b.weight());
    }

    #[test]
    fn commutation_is_symplectic(a in pauli(), b in pauli()) {
        prop_assert_eq!(a.commutes(&b).unwrap(), !symplectic(&a, &b));
        prop_assert_eq!(a.commutes(&b).unwrap(), b.commutes(&a).unwrap());
    }

    #[test]
    fn cliffords_preserve_commutation(a in pauli(), b in pauli(), gates in prop::collection::vec(clifford(), 0..12)) {
        let before = a.commutes(&b).unwrap();
        let (mut a2, mut b2) = (a.clone(), b.clone());
        for g in &gates {
            a2 = a2.conjugate_through(g).unwrap();
            b2 = b2.conjugate_through(g).unwrap();
        }
        prop_assert_eq!(a2.commutes(&b2).unwrap(), before);
        prop_assert_eq!(a2.is_identity(), a.is_identity());
    }

    #[test]
    fn conjugation_is_linear(a in pauli(), b in pauli(), g in clifford()) {
        let lhs = a.multiply(&b).unwrap().conjugate_through(&g).unwrap();
        let rhs = a.conjugate_through(&g).unwrap().multiply(&b.conjugate_through(&g).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn parse_roundtrip(a in pauli()) {
        prop_assert_eq!(PauliOperator::parse(&a.to_string()).unwrap(), a);
    }

    #[test]
    fn bits_xor(a in prop::collection::vec(any::<bool>(), 0..200), seed in any::<u64>()) {
        let n = a.len();
        let x = Bits::from_bools(&a);
        prop_assert_eq!(x.to_bools(), a.clone());
        prop_assert_eq!(x.count_ones(), a.iter().filter(|&&v| v).count());
        let y = Bits::from_indices(n, (0..n).filter(|i| (seed >> (i % 64)) & 1 == 1));
        let mut z = x.clone();
        z.xor_with(&y);
        for i in 0..n {
            prop_assert_eq!(z.get(i), a[i] ^ y.get(i));
        }
        z.xor_with(&y);
        prop_assert_eq!(&z, &x);
        let expected = (0..n).filter(|&i| a[i] && y.get(i)).count() % 2 == 1;
        prop_assert_eq!(x.dot(&y), expected);
        prop_assert_eq!(x.ones().collect::<Vec<_>>(), (0..n).filter(|&i| a[i]).collect::<Vec<_>>());
    }

    #[test]
    fn bits_from_words(len in 0usize..200, words in prop::collection::vec(any::<u64>(), 0..5)) {
        let b = Bits::from_words(len, words.clone());
        prop_assert_eq!(b.len(), len);
        for i in 0..len {
            let w = words.get(i / 64).copied().unwrap_or(0);
            prop_assert_eq!(b.get(i), (w >> (i % 64)) & 1 == 1);
        }
        prop_assert!(b.count_ones() <= len);
    }
}
