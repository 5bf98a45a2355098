use rust_decimal::Decimal;

use super::node::record;
use super::scalar::Scalar;

record! {
    /// Root document: descriptive, technical, process and discipline-specific
    /// metadata of one dataset. Fields appear in serialized output in the
    /// order declared here.
    pub struct EngMetaDataset as "engMeta" {
        Element titles: Vec<Title> = "title",
        Element descriptions: Vec<Description> = "description",
        Element dates: Vec<DatedEvent> = "date",
        Element keywords: Vec<String> = "keyword",
        Element subjects: Vec<String> = "subject",
        Element persons: Vec<PersonOrOrganization> = "person",
        Element funding_references: Vec<FundingReference> = "fundingReference",
        Element project: Option<String> = "project",
        Element context: Vec<RelatedIdentifier> = "context",
        Element resource_type: Option<ResourceType> = "resourceType",
        Element rights_statement: Option<RightsStatement> = "rightsStatement",
        /// Success marker, used to document failed runs.
        Element worked: Option<SuccessMarker> = "worked",
        Element pid: Option<PersistentIdentifier> = "pid",
        Element files: Vec<FileInfo> = "file",
        Element storage: Option<String> = "storage",
        Element format: Option<String> = "format",
        Element system: Option<ObservedSystem> = "system",
        Element processing_steps: Vec<ProcessingStep> = "processingStep",
    }
}

record! {
    pub struct Title as "title" {
        Content text: String = "text",
        Attribute title_type: Option<String> = "titleType",
    }
}

record! {
    pub struct Description as "description" {
        Content text: String = "text",
        Attribute description_type: Option<String> = "descriptionType",
    }
}

record! {
    /// ISO-8601 date or date-time qualified by a date type code.
    pub struct DatedEvent as "date" {
        Content value: String = "value",
        Attribute date_type: Option<String> = "dateType",
    }
}

record! {
    /// Scheme-qualified identifier (DOI, ORCID, Handle, ...).
    pub struct PersistentIdentifier as "identifier" {
        Attribute scheme: String = "scheme",
        Content value: String = "value",
    }
}

record! {
    pub struct PersonOrOrganization as "person" {
        Element name: String = "name",
        Element identifier: Option<PersistentIdentifier> = "identifier",
        Element affiliation: Option<String> = "affiliation",
        Element role: Option<String> = "role",
    }
}

record! {
    pub struct FundingReference as "fundingReference" {
        Element funder_name: String = "funderName",
        Element award_number: Option<String> = "awardNumber",
        Element funder_identifier_type: Option<String> = "funderIdentifierType",
    }
}

record! {
    /// Relation to another research object.
    pub struct RelatedIdentifier as "context" {
        Element identifier: String = "identifier",
        Element related_identifier_type: String = "relatedIdentifierType",
        Element relation_type: String = "relationType",
    }
}

record! {
    pub struct ResourceType as "resourceType" {
        Content text: String = "text",
        Attribute resource_type_general: Option<String> = "resourceTypeGeneral",
    }
}

record! {
    pub struct RightsStatement as "rightsStatement" {
        Element license: Option<String> = "license",
        Element license_uri: Option<String> = "licenseUri",
        Element access_conditions: Option<String> = "accessConditions",
    }
}

record! {
    pub struct SuccessMarker as "worked" {
        Element success: Option<bool> = "success",
        Element note: Option<String> = "note",
    }
}

record! {
    pub struct Checksum as "checksum" {
        Attribute algorithm: String = "algorithm",
        Content digest: String = "digest",
    }
}

record! {
    /// Technical metadata of one file of the dataset.
    pub struct FileInfo as "file" {
        @key filename;
        Element filename: String = "filename",
        Element link: Option<String> = "link",
        Element pid: Option<PersistentIdentifier> = "pid",
        Element checksum: Option<Checksum> = "checksum",
        Element size_bytes: Option<i64> = "sizeBytes",
        Element file_type: Option<String> = "fileType",
    }
}

record! {
    /// Reference from a processing step to a file, by name, link or pid.
    pub struct FileRef as "fileRef" {
        Element filename: Option<String> = "filename",
        Element link: Option<String> = "link",
        Element pid: Option<PersistentIdentifier> = "pid",
    }
}

record! {
    /// Named quantity. `uncertainty` shares the unit of `value`.
    pub struct Variable as "variable" {
        @key name;
        Element name: String = "name",
        Element value: Option<Scalar> = "value",
        Element unit: Option<String> = "unit",
        Element uncertainty: Option<Decimal> = "uncertainty",
        Element symbol: Option<String> = "symbol",
    }
}

record! {
    pub struct ForceField as "forceField" {
        Element name: String = "name",
        Element parameters: Vec<Variable> = "parameter",
    }
}

record! {
    pub struct Component as "component" {
        Element name: String = "name",
        /// e.g. a SMILES code
        Element identifier: Option<String> = "identifier",
        Element force_field: Option<ForceField> = "forceField",
    }
}

record! {
    pub struct TemporalResolution as "temporalResolution" {
        Element number_of_timesteps: Option<i64> = "numberOfTimesteps",
        Element interval: Option<Decimal> = "interval",
        Element interval_unit: Option<String> = "intervalUnit",
    }
}

record! {
    pub struct SpatialResolution as "spatialResolution" {
        Element number_of_cells: Option<i64> = "numberOfCells",
        Element scale: Option<Decimal> = "scale",
        Element scale_unit: Option<String> = "scaleUnit",
    }
}

record! {
    /// The simulated target system.
    pub struct ObservedSystem as "system" {
        Element description: Option<String> = "description",
        Element components: Vec<Component> = "components",
        Element boundary_conditions: Vec<String> = "boundaryConditions",
        Element controlled_variables: Vec<Variable> = "controlledVariables",
        Element measured_variables: Vec<Variable> = "measuredVariables",
        Element parameters: Vec<Variable> = "parameters",
        Element spatial_resolution: Option<SpatialResolution> = "spatialResolution",
        Element temporal_resolution: Option<TemporalResolution> = "temporalResolution",
    }
}

record! {
    pub struct Method as "method" {
        Element name: String = "name",
        Element parameters: Vec<Variable> = "parameter",
    }
}

record! {
    pub struct Compiler as "compiler" {
        Element name: String = "name",
        Element flags: Option<String> = "flags",
    }
}

record! {
    /// Computational environment (cluster, node and core counts, compiler).
    pub struct Environment as "environment" {
        Element name: Option<String> = "name",
        Element nodes: Option<i64> = "nodes",
        Element cores_per_node: Option<i64> = "coresPerNode",
        Element total_cores: Option<i64> = "totalCores",
        Element compiler: Option<Compiler> = "compiler",
    }
}

record! {
    pub struct Instrument as "instrument" {
        Element name: String = "name",
        Element description: Option<String> = "description",
        Element identifier: Option<String> = "identifier",
    }
}

record! {
    pub struct Software as "software" {
        Element name: String = "name",
        Element software_version: Option<String> = "softwareVersion",
        Element contributors: Vec<PersonOrOrganization> = "contributor",
        Element programming_language: Option<String> = "programmingLanguage",
        Element operating_system: Option<String> = "operatingSystem",
        Element url: Option<String> = "url",
        Element software_source_code: Option<String> = "softwareSourceCode",
        Element software_application: Option<String> = "softwareApplication",
        Element code_repository: Option<String> = "codeRepository",
        Element citation: Option<String> = "citation",
        Element reference_publication: Option<String> = "referencePublication",
        Element license: Option<RightsStatement> = "license",
    }
}

record! {
    /// One stage of the research process.
    pub struct ProcessingStep as "processingStep" {
        Element step_type: String = "stepType",
        Element date: Option<String> = "date",
        Element actor: Option<PersonOrOrganization> = "actor",
        Element inputs: Vec<FileRef> = "input",
        Element outputs: Vec<FileRef> = "output",
        Element method: Option<Method> = "method",
        Element error_method: Option<Method> = "errorMethod",
        Element software: Vec<Software> = "software",
        Element instruments: Vec<Instrument> = "instrument",
        Element environment: Option<Environment> = "environment",
        Element execution_command: Option<String> = "executionCommand",
    }
}

impl Title {
    pub fn new(text: impl Into<String>) -> Self {
        Title { text: text.into(), title_type: None }
    }
}

impl Description {
    pub fn new(text: impl Into<String>, description_type: impl Into<String>) -> Self {
        Description { text: text.into(), description_type: Some(description_type.into()) }
    }
}

impl DatedEvent {
    pub fn new(value: impl Into<String>, date_type: impl Into<String>) -> Self {
        DatedEvent { value: value.into(), date_type: Some(date_type.into()) }
    }
}

impl PersistentIdentifier {
    pub fn new(scheme: impl Into<String>, value: impl Into<String>) -> Self {
        PersistentIdentifier { scheme: scheme.into(), value: value.into() }
    }
}

impl PersonOrOrganization {
    pub fn new(name: impl Into<String>, role: impl Into<String>) -> Self {
        PersonOrOrganization { name: name.into(), role: Some(role.into()), ..Default::default() }
    }
}

impl SuccessMarker {
    pub fn succeeded() -> Self {
        SuccessMarker { success: Some(true), note: None }
    }

    pub fn failed(note: impl Into<String>) -> Self {
        SuccessMarker { success: Some(false), note: Some(note.into()) }
    }
}

impl FileRef {
    pub fn named(filename: impl Into<String>) -> Self {
        FileRef { filename: Some(filename.into()), ..Default::default() }
    }

    /// Identity used to link files across steps: pid, else link, else name.
    pub fn locator(&self) -> Option<String> {
        if let Some(pid) = &self.pid {
            if !pid.value.is_empty() {
                return Some(format!("{}:{}", pid.scheme, pid.value));
            }
        }
        self.link.clone().or_else(|| self.filename.clone())
    }
}

impl Variable {
    pub fn new(name: impl Into<String>, value: impl Into<Scalar>) -> Self {
        Variable { name: name.into(), value: Some(value.into()), ..Default::default() }
    }

    pub fn named(name: impl Into<String>) -> Self {
        Variable { name: name.into(), ..Default::default() }
    }

    pub fn with_unit(mut self, unit: impl Into<String>) -> Self {
        self.unit = Some(unit.into());
        self
    }

    pub fn with_uncertainty(mut self, uncertainty: Decimal) -> Self {
        self.uncertainty = Some(uncertainty);
        self
    }
}

impl Component {
    pub fn new(name: impl Into<String>) -> Self {
        Component { name: name.into(), ..Default::default() }
    }
}

impl Method {
    pub fn new(name: impl Into<String>) -> Self {
        Method { name: name.into(), parameters: Vec::new() }
    }

    pub fn with_parameter(mut self, parameter: Variable) -> Self {
        self.parameters.push(parameter);
        self
    }
}

impl Software {
    pub fn new(name: impl Into<String>, version: impl Into<String>) -> Self {
        Software { name: name.into(), software_version: Some(version.into()), ..Default::default() }
    }
}

impl ProcessingStep {
    pub fn new(step_type: impl Into<String>) -> Self {
        ProcessingStep { step_type: step_type.into(), ..Default::default() }
    }
}
