use std::fmt::Write as _;

use proptest::prelude::*;
use rand::Rng as _;
use sqvar::linalg::{vector, SolvePath};
use sqvar::lp::{lp_solve, LpMethod, LpOptions, LpStatus};
use sqvar::mps::*;
use sqvar::rng;

const NETLIB: [&str; 11] = [
    "afiro", "adlittle", "e226", "israel", "etamacro", "stair", "standata", "standgub", "standmps", "shell", "scrs8",
];

fn netlib(name: &str) -> String {
    let path = format!("{}/tests/data/netlib/{name}.mps", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn bundled_netlib_files_parse() {
    for name in NETLIB {
        let g = parse_mps(&netlib(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert!(g.num_rows() > 0 && g.num_cols() > 0, "{name}");
        assert!(g.lower.iter().zip(&g.upper).all(|(l, u)| l <= u), "{name}");
    }
}

#[test]
fn afiro_raw_size() {
    let g = parse_mps(&netlib("afiro")).unwrap();
    assert_eq!((g.num_rows(), g.num_cols()), (27, 32));
    assert_eq!(g.name, "AFIRO");
}

#[test]
fn afiro_solution_maps_back_to_a_feasible_point() {
    let g = parse_mps(&netlib("afiro")).unwrap();
    let (lp, map) = to_lp_u(&g).unwrap();
    let mut o = LpOptions::new(LpMethod::Pdip);
    o.eps = 1e-10;
    o.solve_path = SolvePath::Augmented;
    let r = lp_solve(&lp, &o).unwrap();
    assert_eq!(r.status, LpStatus::Solved);
    let x = map.recover(&r.iterate.x);
    let scale = 1.0 + vector::norm_inf(&g.rhs);
    assert!(
        g.max_violation(&x) <= 1e-8 * scale,
        "violation {:e}",
        g.max_violation(&x)
    );
    let obj = g.objective_value(&x);
    assert!((obj - (r.objective + map.objective_constant)).abs() <= 1e-8 * (1.0 + obj.abs()));
    assert!((obj + 464.753).abs() <= 1e-3 * 464.753);
}

#[test]
fn dependent_rows_are_reported() {
    let g = parse_mps(&netlib("shell")).unwrap();
    assert!(matches!(to_lp_u(&g), Err(MpsError::Lp(_))));
}

/// A random deck together with an original point feasible for it.
fn random_deck(seed: u64) -> (String, Vec<f64>) {
    let mut g = rng::stream(seed, rng::STREAM_TEST);
    let (rows, cols) = (g.random_range(1..5), g.random_range(1..7));
    let mut x = vec![0.0; cols];
    let mut bounds = String::new();
    for (j, xj) in x.iter_mut().enumerate() {
        let v: f64 = g.random_range(-3.0..3.0);
        *xj = v;
        match g.random_range(0..7) {
            0 => writeln!(bounds, " UP B C{j} {}", v + g.random_range(0.0..2.0)).unwrap(),
            1 => writeln!(bounds, " LO B C{j} {}", v - g.random_range(0.0..2.0)).unwrap(),
            2 => writeln!(bounds, " FX B C{j} {v}").unwrap(),
            3 => writeln!(bounds, " FR B C{j}").unwrap(),
            4 => writeln!(bounds, " MI B C{j}\n UP B C{j} {}", v + 1.0).unwrap(),
            5 => {
                writeln!(bounds, " LO B C{j} {}\n UP B C{j} {}", v - 1.0, v + 0.5).unwrap();
            }
            _ => {
                *xj = v.abs();
            }
        }
    }
    let mut deck = String::from("NAME RAND\nROWS\n N OBJ\n");
    let kinds: Vec<char> = (0..rows).map(|_| ['E', 'L', 'G'][g.random_range(0..3)]).collect();
    for (i, k) in kinds.iter().enumerate() {
        writeln!(deck, " {k} R{i}").unwrap();
    }
    deck.push_str("COLUMNS\n");
    let mut act = vec![0.0; rows];
    for (j, xj) in x.iter().enumerate() {
        writeln!(deck, " C{j} OBJ {}", g.random_range(-2.0..2.0)).unwrap();
        for (i, a) in act.iter_mut().enumerate() {
            let v: f64 = g.random_range(-2.0..2.0);
            *a += v * xj;
            writeln!(deck, " C{j} R{i} {v}").unwrap();
        }
    }
    deck.push_str("RHS\n");
    let mut ranges = String::new();
    for (i, k) in kinds.iter().enumerate() {
        let slack: f64 = g.random_range(0.0..1.0);
        let rhs = match k {
            'E' => act[i],
            'L' => act[i] + slack,
            _ => act[i] - slack,
        };
        writeln!(deck, " RHS R{i} {rhs}").unwrap();
        if g.random_bool(0.4) {
            let r = match k {
                'E' => g.random_range(-1.0..1.0),
                _ => slack + g.random_range(0.0..1.0),
            };
            writeln!(ranges, " RNG R{i} {r}").unwrap();
        }
    }
    writeln!(deck, " RHS OBJ {}", g.random_range(-5.0..5.0)).unwrap();
    if !ranges.is_empty() {
        deck.push_str("RANGES\n");
        deck.push_str(&ranges);
    }
    if !bounds.is_empty() {
        deck.push_str("BOUNDS\n");
        deck.push_str(&bounds);
    }
    deck.push_str("ENDATA\n");
    (deck, x)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn standard_form_map_round_trips(seed in 0u64..100_000) {
        let (deck, x) = random_deck(seed);
        let g = parse_mps(&deck).unwrap();
        prop_assume!(g.max_violation(&x) <= 1e-12);
        let (lp, map) = match to_lp_u(&g) {
            Ok(v) => v,
            // random rows can be dependent once fixed columns are removed
            Err(MpsError::Lp(_)) => return Ok(()),
            Err(e) => panic!("{e}\n{deck}"),
        };
        let xs = map.forward(&g, &x);
        prop_assert!(xs.iter().all(|v| *v >= -1e-12));
        let r = vector::sub(&lp.a().matvec(&xs), lp.b());
        prop_assert!(vector::norm_inf(&r) <= 1e-10, "{deck}");
        for (k, &j) in lp.upper_idx().iter().enumerate() {
            prop_assert!(xs[j] <= lp.u()[k] + 1e-12);
        }
        let back = map.recover(&xs);
        prop_assert!(vector::max_abs_diff(&back, &x) <= 1e-12);
        prop_assert!(g.max_violation(&back) <= 1e-10);
        let std_obj = lp.objective(&xs) + map.objective_constant;
        prop_assert!((std_obj - g.objective_value(&x)).abs() <= 1e-10);
    }
}
