//! The checked-in example automata, embedded so tests and the play mode can
//! refer to them without touching the file system.

use crate::automata::ParityAutomaton;

pub struct Fixture {
    pub name: &'static str,
    pub text: &'static str,
    /// the defining condition, for humans
    pub condition: &'static str,
    /// documented minimal winning constant delay for Player O, if any
    pub min_delay: Option<u64>,
}

pub const ALL: &[Fixture] = &[
    Fixture {
        name: "copy",
        text: include_str!("../../fixtures/copy.dpa"),
        condition: "every output letter equals the input letter at the same position",
        min_delay: Some(0),
    },
    Fixture {
        name: "predict",
        text: include_str!("../../fixtures/predict.dpa"),
        condition: "b0 must predict a1 when a0=0 and a3 when a0=1",
        min_delay: Some(3),
    },
    Fixture {
        name: "shift1",
        text: include_str!("../../fixtures/shift1.dpa"),
        condition: "b_i must equal a_{i+1}",
        min_delay: Some(1),
    },
    Fixture {
        name: "shift3",
        text: include_str!("../../fixtures/shift3.dpa"),
        condition: "b_i must equal a_{i+3}",
        min_delay: Some(3),
    },
    Fixture {
        name: "infones",
        text: include_str!("../../fixtures/infones.dpa"),
        condition: "b0 must be 1 exactly when the input carries infinitely many 1s",
        min_delay: None,
    },
];

pub fn by_name(name: &str) -> Option<&'static Fixture> {
    ALL.iter().find(|f| f.name == name)
}

/// Parses the named fixture; all fixtures are unit-tested to parse.
pub fn parse(name: &str) -> Option<ParityAutomaton> {
    by_name(name).map(|f| ParityAutomaton::parse(f.text).expect("fixtures parse"))
}
