use num_traits::Zero;
use polyface::bounds::{convexity_lemma_check, rho, rho_vanishes};
use polyface::exact::{affine_dim, orthogonal_complement_basis, rank};
use polyface::{face_lattice, hull_from_points, IndexSet, Scalar, Vector};
use proptest::prelude::*;

fn int_rows(dim: usize, max_rows: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    prop::collection::vec(prop::collection::vec(-6i64..=6, dim), 1..=max_rows)
}

fn to_vectors(rows: &[Vec<i64>]) -> Vec<Vector> {
    rows.iter().map(|r| Vector::from_ints(r)).collect()
}

fn point_cloud() -> impl Strategy<Value = Vec<Vec<i64>>> {
    (2usize..=4).prop_flat_map(|d| prop::collection::vec(prop::collection::vec(-5i64..=5, d), d + 1..=10))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rank_ignores_scaling_and_row_order(rows in int_rows(4, 6), s in 1i64..=9, i in 0usize..6, j in 0usize..6) {
        let v = to_vectors(&rows);
        let r = rank(&v).unwrap();
        let scaled: Vec<Vector> = v.iter().map(|x| x.scale(&Scalar::from_integer((-s).into()))).collect();
        prop_assert_eq!(rank(&scaled).unwrap(), r);
        let mut swapped = v.clone();
        swapped.swap(i % v.len(), j % v.len());
        prop_assert_eq!(rank(&swapped).unwrap(), r);
        prop_assert!(r <= v.len().min(4));
    }

    #[test]
    fn complement_is_orthogonal(v in prop::collection::vec(-9i64..=9, 2..=6)) {
        prop_assume!(v.iter().any(|&x| x != 0));
        let v = Vector::from_ints(&v);
        let basis = orthogonal_complement_basis(&v).unwrap();
        prop_assert_eq!(basis.len(), v.dim() - 1);
        for (a, b) in basis.iter().enumerate() {
            prop_assert!(b.dot(&v).is_zero());
            for c in &basis[a + 1..] {
                prop_assert!(b.dot(c).is_zero());
            }
        }
        let mut all = basis.clone();
        all.push(v.clone());
        prop_assert_eq!(rank(&all).unwrap(), v.dim());
    }

    #[test]
    fn affine_dim_is_monotone(rows in int_rows(3, 7)) {
        let v = to_vectors(&rows);
        let mut last = -1;
        for n in 1..=v.len() {
            let d = affine_dim(&v[..n]).unwrap();
            prop_assert!(d >= last && d <= last + 1);
            last = d;
        }
    }

    #[test]
    fn hulls_satisfy_euler_and_are_idempotent(rows in point_cloud()) {
        let Ok(p) = hull_from_points(&to_vectors(&rows)) else {
            return Ok(());
        };
        let lattice = face_lattice(&p).unwrap();
        let fv = lattice.f_vector().unwrap();
        prop_assert!(fv.euler_holds(), "{:?}", fv);
        let again = hull_from_points(&p.ambient_vertices()).unwrap();
        prop_assert_eq!(again.vertex_count(), p.vertex_count());
        prop_assert_eq!(face_lattice(&again).unwrap().f_vector().unwrap(), fv);
    }

    #[test]
    fn quotient_counts_faces_above(rows in point_cloud(), pick in any::<prop::sample::Index>()) {
        let Ok(p) = hull_from_points(&to_vectors(&rows)) else {
            return Ok(());
        };
        let lattice = face_lattice(&p).unwrap();
        let proper: Vec<_> = lattice.faces.iter().filter(|f| f.dim >= 0 && f.dim < p.dim as i64).collect();
        let g: &IndexSet = &pick.get(&proper).vertex_set;
        let gdim = pick.get(&proper).dim;
        let q = lattice.quotient(g).unwrap().f_vector().unwrap();
        prop_assert_eq!(q.dim, p.dim as i64 - gdim - 1);
        for j in 0..q.dim {
            let above = lattice.faces_containing(g).filter(|f| f.dim == gdim + 1 + j).count() as u64;
            prop_assert_eq!(q.f(j), above);
        }
        prop_assert!(q.euler_holds());
    }

    #[test]
    fn convexity_lemma_random(a in 0u64..=60, b in 0u64..=60, c in 0u64..=60) {
        prop_assert!(convexity_lemma_check(a, b, c));
    }
}

#[test]
fn rho_vanishes_past_half() {
    for d in 1..=40i64 {
        for k in 0..d {
            assert_eq!(rho_vanishes(d, k), k > (d + 1) / 2, "d={d} k={k}");
            assert_eq!(rho(d, k).unwrap().is_zero(), rho_vanishes(d, k));
        }
    }
}
