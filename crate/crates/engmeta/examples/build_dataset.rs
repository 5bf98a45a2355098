//! Builds a small simulation dataset by hand, then edits it through paths.

use engmeta::*;
use rust_decimal::Decimal;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut simulation = ProcessingStep::new("data generation");
    simulation.date = Some("2024-03-12T09:15:00".into());
    simulation.inputs = vec![FileRef::named("channel.inp")];
    simulation.outputs = vec![FileRef::named("channel_flow.h5")];
    simulation.software = vec![Software::new("OpenFOAM", "v2306")];
    simulation.method = Some(Method::new("large eddy simulation").with_parameter(Variable::new("Smagorinsky constant", Decimal::new(17, 2))));

    let mut d = EngMetaDataset {
        titles: vec![Title::new("Turbulent channel flow at Re_tau = 395")],
        descriptions: vec![Description::new("Wall-resolved LES of a periodic channel.", "Abstract")],
        dates: vec![DatedEvent::new("2024-03-14", "Created")],
        persons: vec![PersonOrOrganization::new("Lindqvist, Erik", "author")],
        keywords: vec!["turbulence".into(), "LES".into()],
        worked: Some(SuccessMarker::succeeded()),
        system: Some(ObservedSystem {
            controlled_variables: vec![Variable::new("friction Reynolds number", 395)],
            ..Default::default()
        }),
        processing_steps: vec![simulation],
        ..Default::default()
    };

    let path = MetadataPath::parse("system.controlledVariables[0].unit")?;
    set_path_in_place(&mut d, &path, Scalar::from("1"))?;
    let version = MetadataPath::parse("processingStep[0].software[0].softwareVersion")?;
    println!("{version} = {:?}", get_scalars(&d, &version));
    println!("{} leaves, citable: {}", d.leaf_count(), validate(&d, Profile::Citable).is_valid());
    print!("{}", canon::to_xml(&d)?);
    Ok(())
}
