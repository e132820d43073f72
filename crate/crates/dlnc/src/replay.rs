//! Built-in regression instances with known answers.
//!
//! `example2`: five packets, four receivers; the graphic construction must
//! place `(1,2),(1,3),(1,4),(2,3),(1,5)`, send `U = ŵ = 4` rows, and the
//! columns must satisfy `e1 - e2 + e4 = 0`.
//!
//! `u24`: every 2-subset of four packets is wanted; the optimum is 3 rows
//! over GF(2) and 2 rows over any larger field.

use std::fmt;
use std::str::FromStr;

use dlnc_core::gf::Field;
use dlnc_core::graphic::{build_graph, build_solution, Location};
use dlnc_core::linalg::CodingMatrix;
use dlnc_core::model::{PacketSet, WantsCollection};
use dlnc_core::oracle::{brute_force_uq, exhaustive_u24_check, UqOutcome, DEFAULT_BUDGET};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Example {
    Example2,
    U24,
}

impl FromStr for Example {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "example2" => Ok(Example::Example2),
            "u24" => Ok(Example::U24),
            _ => Err(format!("unknown example `{s}` (expected example2 or u24)")),
        }
    }
}

impl fmt::Display for Example {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Example::Example2 => "example2",
            Example::U24 => "u24",
        })
    }
}

/// One asserted quantity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: &'static str,
    pub expected: String,
    pub actual: String,
}

impl Check {
    fn new(name: &'static str, expected: impl ToString, actual: impl ToString) -> Self {
        Check { name, expected: expected.to_string(), actual: actual.to_string() }
    }

    pub fn passed(&self) -> bool {
        self.expected == self.actual
    }
}

#[derive(Debug, Clone)]
pub struct Replay {
    pub example: Example,
    pub q: u32,
    /// Per-iteration trace of the graphic construction.
    pub trace: Vec<String>,
    pub matrix: CodingMatrix,
    pub checks: Vec<Check>,
}

impl Replay {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    /// `-expected` / `+actual` lines for every failed check.
    pub fn diff(&self) -> String {
        let mut out = String::new();
        for c in self.checks.iter().filter(|c| !c.passed()) {
            out.push_str(&format!("{}:\n-{}\n+{}\n", c.name, c.expected, c.actual));
        }
        out
    }
}

fn set(packets: &[usize]) -> PacketSet {
    packets.iter().map(|p| p - 1).collect()
}

pub fn example2_wants() -> WantsCollection {
    WantsCollection::new(5, vec![set(&[1, 2, 3]), set(&[1, 3, 4, 5]), set(&[2, 4]), set(&[3, 4])])
        .expect("valid example")
}

pub fn u24_wants() -> WantsCollection {
    let pairs: Vec<PacketSet> = (1..=4).flat_map(|a| (a + 1..=4).map(move |b| set(&[a, b]))).collect();
    WantsCollection::new(4, pairs).expect("valid example")
}

fn placements(locs: &[Location]) -> String {
    locs.iter().map(Location::to_string).collect::<Vec<_>>().join(",")
}

/// `e1 - e2 + e4`, rendered as a column vector.
fn relation(matrix: &CodingMatrix) -> String {
    let f = matrix.field();
    let entries: Vec<String> = (0..matrix.rows())
        .map(|r| {
            let v = f.add_raw(f.sub_raw(matrix.value(r, 0), matrix.value(r, 1)), matrix.value(r, 3));
            v.to_string()
        })
        .collect();
    format!("[{}]", entries.join(","))
}

pub fn replay(example: Example, field: &Field) -> Replay {
    let wants = match example {
        Example::Example2 => example2_wants(),
        Example::U24 => u24_wants(),
    };
    let (graph, trace) = build_graph(&wants);
    let matrix = build_solution(&wants, field, false);
    let verdict = matrix.verify_solution(&wants).expect("dimensions match");
    let q = field.order();
    let mut checks = vec![Check::new("solution", true, verdict.is_solution())];
    match example {
        Example::Example2 => {
            checks.push(Check::new("placements", "(1,2),(1,3),(1,4),(2,3),(1,5)", placements(graph.edges())));
            checks.push(Check::new("U", 4, matrix.rows()));
            checks.push(Check::new("wmax", 4, wants.max_wants()));
            checks.push(Check::new("e1-e2+e4", "[0,0,0,0]", relation(&matrix)));
        }
        Example::U24 => {
            let optimum = if q == 2 { 3 } else { 2 };
            let uq = match brute_force_uq(&wants, field, 4, DEFAULT_BUDGET) {
                Ok(UqOutcome::Optimal(u)) => u.to_string(),
                Ok(other) => format!("{other:?}"),
                Err(e) => e.to_string(),
            };
            checks.push(Check::new("U_q", optimum, uq));
            checks.push(Check::new("two-row solution exists", q != 2, exhaustive_u24_check(field)));
            checks.push(Check::new("graphic U", 3, matrix.rows()));
        }
    }
    Replay { example, q, trace: trace.iter().map(ToString::to_string).collect(), matrix, checks }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples_pass_over_small_fields() {
        for q in [2, 3, 4, 5, 7, 8, 9] {
            let field = Field::new(q).unwrap();
            for example in [Example::Example2, Example::U24] {
                let r = replay(example, &field);
                assert!(r.passed(), "{example} q={q}\n{}", r.diff());
                assert!(r.diff().is_empty());
            }
        }
    }

    #[test]
    fn example2_trace_has_one_line_per_packet() {
        let r = replay(Example::Example2, &Field::new(2).unwrap());
        assert_eq!(r.trace.len(), 5);
        assert!(r.trace[0].starts_with("k=1 "));
        assert!(r.trace[1].ends_with("-> new-vertex v3 (1,3)"));
        assert!(r.trace[3].ends_with("-> (2,3)"));
    }

    #[test]
    fn failed_checks_show_up_in_the_diff() {
        let mut r = replay(Example::Example2, &Field::new(2).unwrap());
        r.checks[1].actual = "(1,2)".into();
        assert!(!r.passed());
        assert_eq!(r.diff(), "placements:\n-(1,2),(1,3),(1,4),(2,3),(1,5)\n+(1,2)\n");
    }

    #[test]
    fn names_round_trip() {
        for e in [Example::Example2, Example::U24] {
            assert_eq!(e.to_string().parse::<Example>(), Ok(e));
        }
        assert!("fig3".parse::<Example>().is_err());
    }
}
