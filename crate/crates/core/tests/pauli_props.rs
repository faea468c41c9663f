use geoecon::pauli::{commutator, decompose, pauli_coefficients, ComplexMatrix};
use geoecon::{AlgebraElement, PauliString};
use num_complex::Complex64;
use proptest::prelude::*;

fn pauli_string(n: usize) -> impl Strategy<Value = PauliString> {
    prop::collection::vec(0u8..4, n).prop_map(|l| PauliString::new(l).unwrap())
}

fn element(n: usize) -> impl Strategy<Value = AlgebraElement> {
    prop::collection::vec(-2.0f64..2.0, (1usize << (2 * n)) - 1).prop_map(move |c| {
        let mut el = AlgebraElement::zero(n);
        for (s, v) in PauliString::basis(n).zip(c) {
            el.add_term(s, v).unwrap();
        }
        el
    })
}

fn hermitian(n: usize) -> impl Strategy<Value = ComplexMatrix> {
    let dim = 1usize << n;
    prop::collection::vec(-1.0f64..1.0, 2 * dim * dim).prop_map(move |v| {
        let mut m = ComplexMatrix::zeros(dim);
        for r in 0..dim {
            for c in 0..dim {
                m.set(r, c, Complex64::new(v[2 * (r * dim + c)], v[2 * (r * dim + c) + 1]));
            }
        }
        &m + &m.adjoint()
    })
}

proptest! {
    #[test]
    fn strings_are_hermitian_involutions(s in (1usize..4).prop_flat_map(pauli_string)) {
        let m = s.to_matrix();
        prop_assert_eq!(m.hermiticity_error(), 0.0);
        prop_assert_eq!(&m * &m, ComplexMatrix::identity(m.dim()));
    }

    #[test]
    fn product_table_matches_matrices(pair in (1usize..4).prop_flat_map(|n| (pauli_string(n), pauli_string(n)))) {
        let (a, b) = pair;
        let (phase, c) = a.product(&b);
        let lhs = &a.to_matrix() * &b.to_matrix();
        prop_assert!(lhs.max_abs_diff(&c.to_matrix().scale(phase)) < 1e-15);
    }

    #[test]
    fn text_form_round_trips(s in (1usize..6).prop_flat_map(pauli_string)) {
        let text = s.to_string();
        prop_assert_eq!(text.parse::<PauliString>().unwrap(), s.clone());
        prop_assert_eq!(text.to_lowercase().parse::<PauliString>().unwrap(), s);
    }

    #[test]
    fn commutator_is_antisymmetric(a in element(2), b in element(2)) {
        let (ma, mb) = (a.to_matrix(), b.to_matrix());
        let ab = commutator(&ma, &mb).unwrap();
        let ba = commutator(&mb, &ma).unwrap();
        prop_assert!((&ab + &ba).max_abs() < 1e-12);
    }

    #[test]
    fn jacobi_identity_holds(a in element(2), b in element(2), c in element(2)) {
        let (x, y, z) = (a.to_matrix(), b.to_matrix(), c.to_matrix());
        let t1 = commutator(&x, &commutator(&y, &z).unwrap()).unwrap();
        let t2 = commutator(&y, &commutator(&z, &x).unwrap()).unwrap();
        let t3 = commutator(&z, &commutator(&x, &y).unwrap()).unwrap();
        prop_assert!((&(&t1 + &t2) + &t3).max_abs() < 1e-10);
    }

    #[test]
    fn decompose_round_trips(m in (1usize..4).prop_flat_map(hermitian)) {
        let n = m.dim().trailing_zeros() as usize;
        let (el, id) = decompose(&m, n).unwrap();
        let rebuilt = &el.to_matrix() + &ComplexMatrix::identity(m.dim()).scale_real(id);
        prop_assert!(rebuilt.max_abs_diff(&m) < 1e-12);
    }

    #[test]
    fn commutator_of_hermitians_is_anti_hermitian(a in element(3), b in element(3)) {
        let c = commutator(&a.to_matrix(), &b.to_matrix()).unwrap();
        let i = Complex64::new(0.0, 1.0);
        prop_assert!(c.scale(i).hermiticity_error() < 1e-12);
        let coeffs = pauli_coefficients(&c.scale(i), 3).unwrap();
        prop_assert!(coeffs.iter().all(|(_, z)| z.im.abs() < 1e-12));
    }
}

#[test]
fn basis_has_four_to_the_n_minus_one_elements() {
    for n in 1..5 {
        assert_eq!(PauliString::basis(n).count(), (1 << (2 * n)) - 1);
    }
}

#[test]
fn strings_are_trace_orthogonal() {
    let all: Vec<_> = PauliString::all(2).collect();
    for a in &all {
        for b in &all {
            let t = a.trace_product(&b.to_matrix());
            let expect = if a == b { 4.0 } else { 0.0 };
            assert!((t - Complex64::new(expect, 0.0)).norm() < 1e-15);
        }
    }
}

#[test]
fn decompose_rejects_bad_input() {
    assert!(decompose(&ComplexMatrix::identity(3), 1).is_err());
    let mut m = ComplexMatrix::zeros(2);
    m.set(0, 1, Complex64::new(1.0, 0.0));
    assert!(decompose(&m, 1).is_err());
}
