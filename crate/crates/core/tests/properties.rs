use dlnc_core::gf::Field;
use dlnc_core::graphic::{build_graph, build_solution, to_matrix, Location};
use dlnc_core::linalg::{CodingMatrix, Symbol};
use dlnc_core::model::{PacketSet, WantsCollection};
use proptest::prelude::*;

const ORDERS: [u32; 7] = [2, 3, 4, 5, 7, 8, 9];

fn matrix_strategy() -> impl Strategy<Value = CodingMatrix> {
    (prop::sample::select(ORDERS.to_vec()), 1usize..5, 1usize..6).prop_flat_map(|(q, rows, cols)| {
        prop::collection::vec(0..q as u8, rows * cols)
            .prop_map(move |v| CodingMatrix::from_values(Field::new(q).unwrap(), rows, cols, v).unwrap())
    })
}

fn wants_strategy(max_k: usize, max_n: usize) -> impl Strategy<Value = WantsCollection> {
    (1..=max_k, 1..=max_n).prop_flat_map(|(k, n)| {
        prop::collection::vec(0..(1u64 << k), n).prop_map(move |bits| {
            WantsCollection::new(k, bits.into_iter().map(PacketSet::from_bits).collect()).unwrap()
        })
    })
}

/// Rank as log_q of the number of distinct vectors in the row space.
fn brute_rank(m: &CodingMatrix) -> usize {
    let f = m.field();
    let q = f.order() as usize;
    let mut span = std::collections::HashSet::new();
    for code in 0..q.pow(m.rows() as u32) {
        let mut c = code;
        let mut v = vec![0u8; m.cols()];
        for r in 0..m.rows() {
            let coeff = (c % q) as u8;
            c /= q;
            for (j, x) in v.iter_mut().enumerate() {
                *x = f.add_raw(*x, f.mul_raw(coeff, m.value(r, j)));
            }
        }
        span.insert(v);
    }
    let mut size = span.len();
    let mut rank = 0;
    while size > 1 {
        size /= q;
        rank += 1;
    }
    rank
}

/// True when the edges form a forest, by depth-first search for a cycle.
fn is_forest(vertices: usize, edges: &[Location]) -> bool {
    let mut adj = vec![Vec::new(); vertices];
    for (i, e) in edges.iter().enumerate() {
        adj[e.lo].push((e.hi, i));
        adj[e.hi].push((e.lo, i));
    }
    let mut seen = vec![false; vertices];
    for start in 0..vertices {
        if seen[start] {
            continue;
        }
        let mut stack = vec![(start, usize::MAX)];
        seen[start] = true;
        while let Some((v, via)) = stack.pop() {
            for &(w, edge) in &adj[v] {
                if edge == via {
                    continue;
                }
                if seen[w] {
                    return false;
                }
                seen[w] = true;
                stack.push((w, edge));
            }
        }
    }
    true
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn rank_matches_span_enumeration(m in matrix_strategy()) {
        prop_assert_eq!(m.rank(None).unwrap(), brute_rank(&m));
    }

    #[test]
    fn rank_survives_row_operations(m in matrix_strategy(), a in 0usize..8, b in 0usize..8, s in 1u8..=255) {
        let f = m.field().clone();
        let rank = m.rank(None).unwrap();
        let (a, b) = (a % m.rows(), b % m.rows());
        let scale = 1 + s % (f.order() as u8 - 1);

        let mut order: Vec<usize> = (0..m.rows()).collect();
        order.reverse();
        prop_assert_eq!(m.select_rows(&order).unwrap().rank(None).unwrap(), rank);

        let rows: Vec<Vec<u8>> = (0..m.rows())
            .map(|r| {
                let row = m.row(r);
                if r == a {
                    row.iter().map(|&x| f.mul_raw(x, scale)).collect()
                } else if r == b {
                    row.iter().zip(m.row(a)).map(|(&x, &y)| f.add_raw(x, f.mul_raw(scale, y))).collect()
                } else {
                    row.to_vec()
                }
            })
            .collect();
        let changed = CodingMatrix::from_rows(f.clone(), m.cols(), &rows).unwrap();
        prop_assert_eq!(changed.rank(None).unwrap(), rank);
    }

    #[test]
    fn rank_is_bounded_and_monotone(m in matrix_strategy(), bits in any::<u64>(), extra in any::<u64>()) {
        let small = PacketSet::from_bits(bits).intersection(PacketSet::prefix(m.cols()));
        let big = small.union(PacketSet::from_bits(extra).intersection(PacketSet::prefix(m.cols())));
        let r_small = m.rank(Some(small)).unwrap();
        prop_assert!(r_small <= small.len().min(m.rows()));
        prop_assert!(r_small <= m.rank(Some(big)).unwrap());
    }

    #[test]
    fn graphic_output_is_sound(w in wants_strategy(15, 40), qi in 0usize..7) {
        let field = Field::new(ORDERS[qi]).unwrap();
        let m = build_solution(&w, &field, false);
        prop_assert!(m.verify_solution(&w).unwrap().s1_ok());
        prop_assert!(w.max_wants() <= m.rows());
        prop_assert!(m.rows() <= w.packets());
        prop_assert_eq!(m, build_solution(&w, &field, false));
    }

    #[test]
    fn pruned_output_is_a_solution(w in wants_strategy(10, 12), qi in 0usize..7) {
        let field = Field::new(ORDERS[qi]).unwrap();
        let m = build_solution(&w, &field, true);
        prop_assert!(m.verify_solution(&w).unwrap().is_solution());
    }

    #[test]
    fn forests_are_exactly_the_independent_columns(w in wants_strategy(8, 8), qi in 0usize..7) {
        let field = Field::new(ORDERS[qi]).unwrap();
        let (graph, _) = build_graph(&w);
        let m = to_matrix(&graph, &field, w.packets()).unwrap();
        for bits in 0..(1u64 << w.packets()) {
            let s = PacketSet::from_bits(bits);
            let edges: Vec<Location> = s.iter().map(|k| graph.edges()[k]).collect();
            let independent = m.rank(Some(s)).unwrap() == s.len();
            prop_assert_eq!(is_forest(graph.vertex_count(), &edges), independent);
        }
    }

    #[test]
    fn s1_implies_every_receiver_decodes(w in wants_strategy(8, 6), qi in 0usize..7, seed in any::<u64>()) {
        let field = Field::new(ORDERS[qi]).unwrap();
        let m = build_solution(&w, &field, false);
        let q = field.order() as u64;
        // Two-symbol payloads from a simple LCG.
        let mut state = seed | 1;
        let source: Vec<Vec<u8>> = (0..w.packets())
            .map(|_| (0..2).map(|_| {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((state >> 33) % q) as u8
            }).collect())
            .collect();
        let coded: Vec<Vec<u8>> = (0..m.rows())
            .map(|r| (0..2).map(|j| (0..w.packets())
                .fold(0, |acc, k| field.add_raw(acc, field.mul_raw(m.value(r, k), source[k][j])))).collect())
            .collect();
        let all_rows: Vec<usize> = (0..m.rows()).collect();
        for &want in w.sets() {
            let got = m.decode(&all_rows, want, |s| match s {
                Symbol::Coded(r) => coded[r].clone(),
                Symbol::Known(k) => source[k].clone(),
            }).unwrap();
            let expected: Vec<(usize, Vec<u8>)> = want.iter().map(|k| (k, source[k].clone())).collect();
            prop_assert_eq!(got, expected);
            prop_assert_eq!(m.decodable(&all_rows, want).unwrap(), want);
        }
    }

    #[test]
    fn wants_round_trip_through_the_sfm(w in wants_strategy(20, 10)) {
        let inst = w.to_instance().unwrap();
        prop_assert_eq!(inst.wants(), w.clone());
        let again = dlnc_core::model::ReceptionInstance::from_rows(w.packets(), &inst.rows()).unwrap();
        prop_assert_eq!(again, inst);
    }
}
