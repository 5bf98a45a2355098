//! The EngMeta object model: typed records, path addressing, validation
//! and merging.

pub mod codes;
pub mod node;
mod path;
mod scalar;
mod types;
mod validate;

pub use codes::{CodeLists, CHECKSUM_ALGORITHMS, STEP_TYPES};
pub use node::{Conflict, Diagnostic, LeafKind, MergePolicy, PathError, Tree, Value};
pub use path::{MetadataPath, PathParseError, Segment};
pub use scalar::{Scalar, ScalarKind};
pub use types::*;
pub use validate::{
    is_iso8601, is_iso8601_date_time, validate, validate_with, Finding, Profile, Severity, ValidationReport,
};

use node::Kind;

/// Result of a path lookup: a scalar leaf or a structured element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PathValue {
    Scalar(Scalar),
    Node(Tree),
}

impl PathValue {
    pub fn as_scalar(&self) -> Option<&Scalar> {
        match self {
            PathValue::Scalar(s) => Some(s),
            PathValue::Node(_) => None,
        }
    }
}

impl EngMetaDataset {
    pub fn tree(&self) -> Option<Tree> {
        Value::tree(self)
    }

    pub fn is_empty(&self) -> bool {
        self.is_absent()
    }

    /// Number of populated scalar leaves.
    pub fn leaf_count(&self) -> usize {
        self.tree().map_or(0, |t| t.leaf_count())
    }
}

/// All values addressed by `path`. Missing elements or indices yield an
/// empty list; a segment without an index selects every list element.
pub fn get_path(dataset: &EngMetaDataset, path: &MetadataPath) -> Vec<PathValue> {
    let Some(tree) = dataset.tree() else {
        return Vec::new();
    };
    let mut found = Vec::new();
    tree.collect(path.segments(), &mut found);
    found
        .into_iter()
        .map(|t| match t {
            Tree::Leaf(l) => PathValue::Scalar(l.value.clone()),
            node => PathValue::Node(node.clone()),
        })
        .collect()
}

/// Scalars addressed by `path`, skipping structured elements.
pub fn get_scalars(dataset: &EngMetaDataset, path: &MetadataPath) -> Vec<Scalar> {
    get_path(dataset, path).into_iter().filter_map(|v| match v {
        PathValue::Scalar(s) => Some(s),
        PathValue::Node(_) => None,
    }).collect()
}

/// Returns a copy of `dataset` with the scalar at `path` set to `value`.
///
/// Intermediate elements are created on demand. A list index may be at
/// most one past the current end (append); a missing index means 0.
pub fn set_path(dataset: &EngMetaDataset, path: &MetadataPath, value: Scalar) -> Result<EngMetaDataset, PathError> {
    let mut next = dataset.clone();
    next.set(path.segments(), value, &MetadataPath::root())?;
    Ok(next)
}

/// In-place variant of [`set_path`].
pub fn set_path_in_place(dataset: &mut EngMetaDataset, path: &MetadataPath, value: Scalar) -> Result<(), PathError> {
    let mut next = dataset.clone();
    next.set(path.segments(), value, &MetadataPath::root())?;
    *dataset = next;
    Ok(())
}

/// Combines two documents. Unequal scalars present in both produce a
/// [`Conflict`] resolved by `policy`; lists append the overlay elements not
/// already present in the base.
pub fn merge(base: &EngMetaDataset, overlay: &EngMetaDataset, policy: MergePolicy) -> (EngMetaDataset, Vec<Conflict>) {
    let mut out = base.clone();
    let mut conflicts = Vec::new();
    out.merge_from(overlay, &MetadataPath::root(), policy, &mut conflicts);
    (out, conflicts)
}

/// Schema information for the field a path ends at.
#[derive(Debug, Clone, Copy)]
pub struct FieldInfo {
    pub list: bool,
    pub leaf: Option<LeafKind>,
    /// Record type name when the field is structured.
    pub record: Option<&'static str>,
}

/// Resolves every segment of `path` against the schema.
pub fn describe_path(path: &MetadataPath) -> Option<Vec<FieldInfo>> {
    let mut kind = EngMetaDataset::kind();
    let mut out = Vec::new();
    for seg in path.segments() {
        let field = kind.field(&seg.name)?;
        kind = (field.kind)();
        out.push(FieldInfo {
            list: field.list,
            leaf: match kind {
                Kind::Leaf(l) => Some(l),
                Kind::Record { .. } => None,
            },
            record: kind.record_name(),
        });
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rust_decimal::Decimal;

    fn p(s: &str) -> MetadataPath {
        MetadataPath::parse(s).unwrap()
    }

    #[test]
    fn set_creates_intermediate_nodes() {
        let d = set_path(&EngMetaDataset::default(), &p("system.temporalResolution.numberOfTimesteps"), Scalar::Integer(5_000_000)).unwrap();
        let tr = d.system.as_ref().unwrap().temporal_resolution.as_ref().unwrap();
        assert_eq!(tr.number_of_timesteps, Some(5_000_000));
        assert_eq!(get_scalars(&d, &p("system.temporalResolution.numberOfTimesteps")), vec![Scalar::Integer(5_000_000)]);
    }

    #[test]
    fn set_appends_one_past_end_only() {
        let mut d = EngMetaDataset::default();
        d.processing_steps = vec![ProcessingStep::new("data generation"), ProcessingStep::new("post processing")];
        let d3 = set_path(&d, &p("processingStep[2].stepType"), "analysis".into()).unwrap();
        assert_eq!(d3.processing_steps.len(), 3);
        assert_eq!(d3.processing_steps[2].step_type, "analysis");
        assert_eq!(d.processing_steps.len(), 2, "input must not change");

        let err = set_path(&d, &p("processingStep[5].stepType"), "analysis".into()).unwrap_err();
        assert!(matches!(err, PathError::IndexGap { index: 5, len: 2, .. }));
    }

    #[test]
    fn set_rejects_bad_targets() {
        let d = EngMetaDataset::default();
        assert!(matches!(set_path(&d, &p("system"), "x".into()), Err(PathError::NotScalar { .. })));
        assert!(matches!(
            set_path(&d, &p("system.temporalResolution.numberOfTimesteps"), "abc".into()),
            Err(PathError::IncompatibleType { .. })
        ));
        assert!(matches!(set_path(&d, &p("project"), " ".into()), Err(PathError::EmptyValue { .. })));
        let v = set_path(&d, &p("system.parameters[0].value"), Scalar::Decimal(Decimal::new(5, 1))).unwrap();
        assert_eq!(v.system.unwrap().parameters[0].value, Some(Scalar::Decimal(Decimal::new(5, 1))));
    }

    #[test]
    fn get_missing_is_empty() {
        let d = set_path(&EngMetaDataset::default(), &p("system.components[0].name"), "water".into()).unwrap();
        assert!(get_path(&d, &p("system.components[99].name")).is_empty());
        assert_eq!(get_scalars(&d, &p("system.components.name")), vec![Scalar::text("water")]);
        assert!(matches!(get_path(&d, &p("system"))[0], PathValue::Node(_)));
    }

    #[test]
    fn merge_dedups_and_reports_conflicts() {
        let mut a = EngMetaDataset::default();
        a.titles.push(Title::new("A"));
        let (m, c) = merge(&a, &a, MergePolicy::FirstWins);
        assert_eq!(m.titles.len(), 1);
        assert!(c.is_empty());

        let t = p("system.controlledVariables[0].value");
        let base = set_path(&set_path(&EngMetaDataset::default(), &p("system.controlledVariables[0].name"), "temperature".into()).unwrap(), &t, 300.into()).unwrap();
        let mut overlay = base.clone();
        overlay.system.as_mut().unwrap().controlled_variables[0].value = Some(310.into());
        // variables merge by name, so the differing value is a conflict
        let (m, c) = merge(&base, &overlay, MergePolicy::FirstWins);
        assert_eq!(get_scalars(&m, &t), vec![Scalar::Integer(300)]);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].path, t);

        let base = set_path(&EngMetaDataset::default(), &p("system.temporalResolution.numberOfTimesteps"), 300.into()).unwrap();
        let overlay = set_path(&EngMetaDataset::default(), &p("system.temporalResolution.numberOfTimesteps"), 310.into()).unwrap();
        let (m, c) = merge(&base, &overlay, MergePolicy::FirstWins);
        assert_eq!(get_scalars(&m, &p("system.temporalResolution.numberOfTimesteps")), vec![Scalar::Integer(300)]);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].chosen, Scalar::Integer(300));
        let (m, _) = merge(&base, &overlay, MergePolicy::OverlayWins);
        assert_eq!(get_scalars(&m, &p("system.temporalResolution.numberOfTimesteps")), vec![Scalar::Integer(310)]);
    }

    #[test]
    fn describe_reports_list_and_leaf_kind() {
        let info = describe_path(&p("system.controlledVariables.value")).unwrap();
        assert!(info[1].list);
        assert_eq!(info[1].record, Some("variable"));
        assert_eq!(info[2].leaf, Some(LeafKind::Any));
    }
}
