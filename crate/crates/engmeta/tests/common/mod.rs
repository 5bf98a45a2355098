//! Strategies for structurally valid random datasets, shared by the
//! integration tests and the acceptance runner.
#![allow(dead_code)]

use std::path::PathBuf;

use engmeta::*;
use proptest::collection::vec;
use proptest::option;
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::{Config, TestRng, TestRunner};
use rust_decimal::Decimal;

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

/// Non-blank text, including characters that need escaping.
pub fn text() -> impl Strategy<Value = String> {
    prop_oneof![
        4 => "[A-Za-z][A-Za-z0-9 ._,-]{0,16}",
        1 => "[A-Za-z][A-Za-z <>&\"'é\t\n]{0,12}[a-z]",
    ]
}

fn word() -> impl Strategy<Value = String> {
    "[a-z]{1,10}"
}

fn code(list: &'static [&'static str]) -> impl Strategy<Value = String> {
    prop::sample::select(list).prop_map(str::to_string)
}

fn date() -> impl Strategy<Value = String> {
    (1990i32..2030, 1u32..=12, 1u32..=28, option::of((0u32..24, 0u32..60, 0u32..60))).prop_map(|(y, m, d, t)| match t {
        None => format!("{y:04}-{m:02}-{d:02}"),
        Some((h, mi, s)) => format!("{y:04}-{m:02}-{d:02}T{h:02}:{mi:02}:{s:02}"),
    })
}

fn decimal() -> impl Strategy<Value = Decimal> {
    (-1_000_000i64..1_000_000, 0u32..6).prop_map(|(m, s)| Decimal::new(m, s))
}

fn positive_decimal() -> impl Strategy<Value = Decimal> {
    (1i64..1_000_000, 0u32..6).prop_map(|(m, s)| Decimal::new(m, s))
}

pub fn scalar() -> impl Strategy<Value = Scalar> {
    prop_oneof![
        text().prop_map(Scalar::Text),
        any::<i64>().prop_map(Scalar::Integer),
        decimal().prop_map(Scalar::Decimal),
        any::<bool>().prop_map(Scalar::Boolean),
    ]
}

fn identifier() -> impl Strategy<Value = PersistentIdentifier> {
    (code(&["DOI", "ORCID", "Handle"]), "[0-9a-z./-]{4,20}").prop_map(|(s, v)| PersistentIdentifier::new(s, v))
}

fn uri() -> impl Strategy<Value = String> {
    "[a-z]{3,8}".prop_map(|p| format!("https://example.org/{p}"))
}

prop_compose! {
    fn person()(
        name in text(),
        identifier in option::of(identifier()),
        affiliation in option::of(text()),
        role in option::of(code(&["author", "contactPerson", "researcher", "supervisor"])),
    ) -> PersonOrOrganization {
        PersonOrOrganization { name, identifier, affiliation, role }
    }
}

fn variable() -> impl Strategy<Value = Variable> {
    (word(), scalar(), option::of(word()), option::of(decimal()), option::of(word())).prop_map(|(name, value, unit, unc, symbol)| {
        let uncertainty = unc.filter(|_| value.is_numeric()).map(|u| u.abs());
        Variable { name, value: Some(value), unit, uncertainty, symbol }
    })
}

/// Variables with pairwise distinct names.
fn variables(max: usize) -> impl Strategy<Value = Vec<Variable>> {
    vec(variable(), 0..=max).prop_map(|vs| {
        let mut seen = std::collections::HashSet::new();
        vs.into_iter().filter(|v| seen.insert(v.name.clone())).collect()
    })
}

fn checksum() -> impl Strategy<Value = Checksum> {
    prop_oneof![
        "[0-9a-f]{32}".prop_map(|d| Checksum { algorithm: "MD5".into(), digest: d }),
        "[0-9a-f]{64}".prop_map(|d| Checksum { algorithm: "SHA-256".into(), digest: d }),
    ]
}

prop_compose! {
    fn file()(
        filename in "[a-z]{1,8}\\.(log|dat|xtc|mdp)",
        link in option::of(uri()),
        pid in option::of(identifier()),
        checksum in option::of(checksum()),
        size in option::of(0i64..1_000_000_000),
        file_type in option::of(word()),
    ) -> FileInfo {
        FileInfo { filename, link, pid, checksum, size_bytes: size, file_type }
    }
}

fn file_ref() -> impl Strategy<Value = FileRef> {
    prop_oneof![
        3 => "[a-z]{1,4}\\.(dat|xtc)".prop_map(FileRef::named),
        1 => uri().prop_map(|l| FileRef { link: Some(l), ..Default::default() }),
        1 => identifier().prop_map(|p| FileRef { pid: Some(p), ..Default::default() }),
    ]
}

fn method() -> impl Strategy<Value = Method> {
    (text(), vec(variable(), 0..3)).prop_map(|(name, parameters)| Method { name, parameters })
}

prop_compose! {
    fn software()(
        name in text(),
        version in option::of("[0-9]{1,2}\\.[0-9]{1,2}"),
        contributors in vec(person(), 0..2),
        language in option::of(word()),
        url in option::of(uri()),
        license in option::of(word()),
    ) -> Software {
        Software {
            name,
            software_version: version,
            contributors,
            programming_language: language,
            url,
            license: license.map(|l| RightsStatement { license: Some(l), ..Default::default() }),
            ..Default::default()
        }
    }
}

prop_compose! {
    fn environment()(
        name in option::of(word()),
        nodes in option::of(1i64..1000),
        cores in option::of(1i64..128),
        compiler in option::of((word(), option::of("-O[0-3]"))),
    ) -> Environment {
        Environment {
            name,
            nodes,
            cores_per_node: cores,
            total_cores: nodes.zip(cores).map(|(n, c)| n * c),
            compiler: compiler.map(|(name, flags)| Compiler { name, flags }),
        }
    }
}

prop_compose! {
    pub fn step()(
        step_type in code(&STEP_TYPES),
        date in option::of(date()),
        actor in option::of(person()),
        inputs in vec(file_ref(), 0..3),
        outputs in vec(file_ref(), 0..3),
        method in option::of(method()),
        error_method in option::of(method()),
        software in vec(software(), 0..3),
        instruments in vec(text().prop_map(|name| Instrument { name, ..Default::default() }), 0..2),
        environment in option::of(environment()),
        execution_command in option::of(text()),
    ) -> ProcessingStep {
        ProcessingStep {
            step_type,
            date,
            actor,
            inputs,
            outputs,
            method,
            error_method,
            software,
            instruments,
            environment: environment.filter(|e| !e.is_absent()),
            execution_command,
        }
    }
}

fn component() -> impl Strategy<Value = Component> {
    (word(), option::of("[A-Z][A-Za-z0-9=()]{0,8}"), option::of((text(), vec(variable(), 0..2)))).prop_map(
        |(name, identifier, ff)| Component {
            name,
            identifier,
            force_field: ff.map(|(name, parameters)| ForceField { name, parameters }),
        },
    )
}

prop_compose! {
    pub fn system()(
        description in option::of(text()),
        components in vec(component(), 0..3),
        boundary_conditions in vec(word(), 0..3),
        controlled in variables(3),
        measured in variables(2),
        parameters in variables(2),
        cells in option::of((option::of(0i64..1_000_000), option::of(positive_decimal()), option::of(word()))),
        steps in option::of((option::of(0i64..10_000_000), option::of(positive_decimal()), option::of(word()))),
    ) -> ObservedSystem {
        ObservedSystem {
            description,
            components,
            boundary_conditions,
            controlled_variables: controlled,
            measured_variables: measured,
            parameters,
            spatial_resolution: cells
                .map(|(n, s, u)| SpatialResolution { number_of_cells: n, scale: s, scale_unit: u })
                .filter(|r| !r.is_absent()),
            temporal_resolution: steps
                .map(|(n, i, u)| TemporalResolution { number_of_timesteps: n, interval: i, interval_unit: u })
                .filter(|r| !r.is_absent()),
        }
    }
}

prop_compose! {
    fn descriptive()(
        titles in vec((text(), option::of(code(&["main", "subtitle", "alternative"]))), 0..3),
        descriptions in vec((text(), code(&["Abstract", "Methods", "Other"])), 0..2),
        dates in vec((date(), code(&["Created", "Issued", "Updated"])), 0..3),
        keywords in vec(text(), 0..4),
        subjects in vec(word(), 0..2),
        persons in vec(person(), 0..3),
        funding in vec((text(), option::of(word())), 0..2),
        project in option::of(text()),
    ) -> EngMetaDataset {
        EngMetaDataset {
            titles: titles.into_iter().map(|(text, title_type)| Title { text, title_type }).collect(),
            descriptions: descriptions.into_iter().map(|(t, k)| Description::new(t, k)).collect(),
            dates: dates.into_iter().map(|(v, k)| DatedEvent::new(v, k)).collect(),
            keywords,
            subjects,
            persons,
            funding_references: funding
                .into_iter()
                .map(|(funder_name, award_number)| FundingReference { funder_name, award_number, funder_identifier_type: None })
                .collect(),
            project,
            ..Default::default()
        }
    }
}

prop_compose! {
    fn related()(identifier in uri(), kind in code(&["URL", "DOI"]), relation in code(&["Cites", "IsPartOf", "References"])) -> RelatedIdentifier {
        RelatedIdentifier { identifier, related_identifier_type: kind, relation_type: relation }
    }
}

prop_compose! {
    /// Any structurally valid dataset.
    pub fn dataset()(
        base in descriptive(),
        context in vec(related(), 0..2),
        resource in option::of((text(), option::of(code(&["Dataset", "Software", "Workflow"])))),
        rights in option::of((word(), option::of(uri()))),
        worked in option::of((any::<bool>(), option::of(text()))),
        pid in option::of(identifier()),
        files in vec(file(), 0..3),
        storage in option::of(word()),
        format in option::of(word()),
        system in option::of(system()),
        steps in vec(step(), 0..4),
    ) -> EngMetaDataset {
        let mut files = files;
        let mut names = std::collections::HashSet::new();
        files.retain(|f| names.insert(f.filename.clone()));
        EngMetaDataset {
            context,
            resource_type: resource.map(|(text, general)| ResourceType { text, resource_type_general: general }),
            rights_statement: rights.map(|(license, license_uri)| RightsStatement { license: Some(license), license_uri, access_conditions: None }),
            worked: worked.map(|(success, note)| SuccessMarker { success: Some(success), note }),
            pid,
            files,
            storage,
            format,
            system: system.filter(|s| !s.is_absent()),
            processing_steps: steps,
            ..base
        }
    }
}

/// Property-test settings: `cases` runs, no regression files.
pub fn config(cases: u32) -> Config {
    Config { cases, failure_persistence: None, ..Config::default() }
}

/// `n` datasets drawn deterministically from `seed`.
pub fn sample_datasets(n: usize, seed: u64) -> Vec<EngMetaDataset> {
    let mut bytes = [0u8; 32];
    bytes[..8].copy_from_slice(&seed.to_le_bytes());
    let rng = TestRng::from_seed(proptest::test_runner::RngAlgorithm::ChaCha, &bytes);
    let mut runner = TestRunner::new_with_rng(Config::default(), rng);
    let strategy = dataset();
    (0..n).map(|_| strategy.new_tree(&mut runner).expect("strategy never rejects").current()).collect()
}
