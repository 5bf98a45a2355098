//! A complete example dataset: molecular dynamics simulations of two
//! molecules in solution, run with Gromacs and evaluated with Python.
//!
//! Three processing steps: the simulation (`data generation`) writes the
//! trajectories, a script cleans them (`post processing`) and a second
//! script computes the distance statistics (`analysis`).

use rust_decimal::Decimal;

use crate::model::*;

pub const GROMACS_VERSION: &str = "2019.3";
pub const METHOD: &str = "thermodynamical simulation with umbrella sampling";
pub const ERROR_METHOD: &str = "standard error from decorrelation";

/// Trajectory files written by the simulation and read by post processing.
pub const TRAJECTORIES: [&str; 2] = ["traj_window01.xtc", "traj_window02.xtc"];

fn variable(name: &str, value: impl Into<Scalar>, unit: Option<&str>) -> Variable {
    let v = Variable::new(name, value);
    match unit {
        Some(u) => v.with_unit(u),
        None => v,
    }
}

fn researcher() -> PersonOrOrganization {
    PersonOrOrganization {
        name: "Weber, Anna".into(),
        identifier: Some(PersistentIdentifier::new("ORCID", "0000-0002-1825-0097")),
        affiliation: Some("Institute of Thermodynamics".into()),
        role: Some("author".into()),
    }
}

fn system() -> ObservedSystem {
    let tip4p = ForceField {
        name: "TIP4P/2005".into(),
        parameters: vec![variable("sigma", Decimal::new(31589, 4), Some("Angstrom"))],
    };
    let opls = ForceField {
        name: "OPLS-AA".into(),
        parameters: vec![variable("cutoff", Decimal::new(12, 1), Some("nm"))],
    };
    ObservedSystem {
        description: Some("two methanol molecules in water".into()),
        components: vec![
            Component { name: "methanol".into(), identifier: Some("CO".into()), force_field: Some(opls) },
            Component { name: "water".into(), identifier: Some("O".into()), force_field: Some(tip4p) },
        ],
        boundary_conditions: vec!["periodic".into()],
        controlled_variables: vec![
            variable("number of molecules", 2172, None),
            variable("temperature", 300, Some("K")),
            variable("pressure", 1, Some("bar")),
        ],
        measured_variables: vec![variable("distance between the molecules", Decimal::new(47, 2), Some("nm"))],
        parameters: Vec::new(),
        spatial_resolution: None,
        temporal_resolution: Some(TemporalResolution {
            number_of_timesteps: Some(5_000_000),
            interval: Some(Decimal::new(2, 0)),
            interval_unit: Some("fs".into()),
        }),
    }
}

fn simulation() -> ProcessingStep {
    let mut gromacs = Software::new("Gromacs", GROMACS_VERSION);
    gromacs.software_source_code = Some("https://gitlab.com/gromacs/gromacs".into());
    gromacs.reference_publication = Some("doi:10.1016/j.softx.2015.06.001".into());
    ProcessingStep {
        step_type: "data generation".into(),
        date: Some("2019-11-04T17:30:00".into()),
        actor: Some(researcher()),
        inputs: ["md.mdp", "topol.top", "conf.gro"].into_iter().map(FileRef::named).collect(),
        outputs: TRAJECTORIES.into_iter().map(FileRef::named).collect(),
        method: Some(Method {
            name: METHOD.into(),
            parameters: vec![
                variable("integrator", "md", None),
                variable("thermostat", "v-rescale", None),
                variable("barostat", "Parrinello-Rahman", None),
            ],
        }),
        error_method: None,
        software: vec![gromacs],
        instruments: Vec::new(),
        environment: Some(Environment {
            name: Some("hpc-cluster".into()),
            nodes: Some(4),
            cores_per_node: Some(24),
            total_cores: Some(96),
            compiler: Some(Compiler { name: "gcc 7.3.0".into(), flags: Some("-O3 -march=haswell".into()) }),
        }),
        execution_command: Some("gmx mdrun -deffnm md".into()),
    }
}

fn post_processing() -> ProcessingStep {
    let script = Software {
        name: "clean_trajectories.py".into(),
        url: Some("https://example.org/scripts/clean_trajectories.py".into()),
        programming_language: Some("Python".into()),
        ..Default::default()
    };
    ProcessingStep {
        step_type: "post processing".into(),
        date: Some("2019-11-05".into()),
        inputs: TRAJECTORIES.into_iter().map(FileRef::named).collect(),
        outputs: vec![FileRef::named("distances_clean.dat")],
        software: vec![script],
        ..Default::default()
    }
}

fn analysis() -> ProcessingStep {
    let script = Software {
        name: "distance_statistics.py".into(),
        url: Some("https://example.org/scripts/distance_statistics.py".into()),
        programming_language: Some("Python".into()),
        ..Default::default()
    };
    ProcessingStep {
        step_type: "analysis".into(),
        date: Some("2019-11-06".into()),
        inputs: vec![FileRef::named("distances_clean.dat")],
        outputs: vec![FileRef::named("distance_histogram.dat")],
        error_method: Some(Method::new(ERROR_METHOD)),
        software: vec![script],
        ..Default::default()
    }
}

/// The full three-step Gromacs dataset. Passes structural and citable
/// validation.
pub fn gromacs_dataset() -> EngMetaDataset {
    EngMetaDataset {
        titles: vec![Title::new("Umbrella sampling of methanol pairs in water")],
        descriptions: vec![Description::new(
            "Potential of mean force between two methanol molecules from umbrella sampling simulations.",
            "Abstract",
        )],
        dates: vec![DatedEvent::new("2019-11-06", "Created")],
        keywords: vec!["molecular dynamics".into(), "umbrella sampling".into()],
        subjects: vec!["Engineering".into()],
        persons: vec![researcher()],
        project: Some("Transport in Dilute Solutions".into()),
        resource_type: Some(ResourceType { text: "simulation data".into(), resource_type_general: Some("Dataset".into()) }),
        worked: Some(SuccessMarker::succeeded()),
        system: Some(system()),
        processing_steps: vec![simulation(), post_processing(), analysis()],
        ..Default::default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prov::{to_prov, EntityKind, RelationKind};

    #[test]
    fn fixture_is_valid() {
        let d = gromacs_dataset();
        assert_eq!(validate(&d, Profile::Structural).error_count(), 0, "{}", validate(&d, Profile::Structural));
        assert!(validate(&d, Profile::Citable).is_valid());
    }

    #[test]
    fn trajectories_chain_steps() {
        let doc = to_prov(&gromacs_dataset());
        assert_eq!(doc.activities.len(), 3);
        let files: Vec<_> = doc.entities.iter().filter(|e| e.kind == EntityKind::File).collect();
        for name in TRAJECTORIES {
            let e = files.iter().find(|e| e.label == name).unwrap();
            let gen: Vec<_> = doc.relations_of(RelationKind::WasGeneratedBy, &e.id).collect();
            let used: Vec<_> = doc.relations_of(RelationKind::Used, &e.id).collect();
            assert_eq!(gen.len(), 1);
            assert_eq!(gen[0].object, "act_0");
            assert_eq!(used.len(), 1);
            assert_eq!(used[0].subject, "act_1");
        }
        // three input files, software, method, environment, command
        let step0_used = doc.relations.iter().filter(|r| r.kind == RelationKind::Used && r.subject == "act_0").count();
        assert_eq!(step0_used, 7);
    }
}
