use std::collections::BTreeSet;

use mvnlab::suites::SuiteRegistry;
use mvnlab_cli::{Command, ExperimentRegistry};

#[test]
fn every_command_is_registered() {
    let registry = ExperimentRegistry::standard();
    assert_eq!(registry.commands(), Command::ALL.to_vec());
    for c in Command::ALL {
        assert_eq!(registry.get(c).unwrap().command(), c);
    }
}

#[test]
fn every_library_suite_is_reachable() {
    let experiments = ExperimentRegistry::standard();
    let suites = SuiteRegistry::standard();
    let reachable: BTreeSet<&str> =
        experiments.commands().into_iter().flat_map(|c| experiments.get(c).unwrap().suites().iter().copied()).collect();
    let all: BTreeSet<&str> = suites.names().into_iter().collect();
    assert_eq!(reachable, all);
}

#[test]
fn command_names_round_trip_through_clap() {
    use clap::ValueEnum;
    for c in Command::ALL {
        assert_eq!(Command::from_str(c.name(), false).unwrap(), c);
    }
}
