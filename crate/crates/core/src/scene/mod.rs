//! Scene annotations, domain knowledge, and the rule-based mapping from
//! detections to typed PDDL objects.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::pddl::{Name, TypedObject};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SceneError {
    #[error("domain knowledge has no query elaborations")]
    EmptyKnowledge,
    #[error("detection label `{0}` has no canonical object name")]
    UnknownLabel(String),
    #[error("class `{class}` has two boxes tied on the naming key ({key})")]
    AmbiguousNaming { class: Name, key: f64 },
    #[error("object class `{0}` has no type in the type map")]
    MissingType(Name),
    #[error("object name `{0}` is produced twice")]
    DuplicateName(Name),
    #[error("invalid scene annotation: {0}")]
    InvalidAnnotation(String),
    #[error("invalid domain knowledge: {0}")]
    InvalidKnowledge(String),
}

/// Pixel box with top-left origin; serialized as `[x, y, w, h]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct BoundingBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl From<[f64; 4]> for BoundingBox {
    fn from([x, y, w, h]: [f64; 4]) -> Self {
        BoundingBox { x, y, w, h }
    }
}

impl From<BoundingBox> for [f64; 4] {
    fn from(b: BoundingBox) -> Self {
        [b.x, b.y, b.w, b.h]
    }
}

impl BoundingBox {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Self {
        BoundingBox { x, y, w, h }
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn iou(&self, other: &BoundingBox) -> f64 {
        let ix = (self.x + self.w).min(other.x + other.w) - self.x.max(other.x);
        let iy = (self.y + self.h).min(other.y + other.h) - self.y.max(other.y);
        if ix <= 0.0 || iy <= 0.0 {
            return 0.0;
        }
        let inter = ix * iy;
        inter / (self.area() + other.area() - inter)
    }

    fn key(&self) -> [f64; 4] {
        [self.x, self.y, self.w, self.h]
    }
}

impl std::fmt::Display for BoundingBox {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {}, {}, {}]", self.x, self.y, self.w, self.h)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub label: String,
    #[serde(rename = "box")]
    pub bbox: BoundingBox,
    pub score: f64,
}

impl Detection {
    pub fn new(label: &str, bbox: BoundingBox, score: f64) -> Self {
        Detection {
            label: label.to_string(),
            bbox,
            score,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneAnnotation {
    pub image: String,
    pub width: f64,
    pub height: f64,
    pub detections: Vec<Detection>,
    /// Caption text keyed by detection index.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub captions: BTreeMap<usize, String>,
}

impl SceneAnnotation {
    pub fn from_json(text: &str) -> Result<Self, SceneError> {
        let scene: SceneAnnotation =
            serde_json::from_str(text).map_err(|e| SceneError::InvalidAnnotation(e.to_string()))?;
        scene.check()?;
        Ok(scene)
    }

    pub fn check(&self) -> Result<(), SceneError> {
        let bad = |msg: String| Err(SceneError::InvalidAnnotation(msg));
        for (i, d) in self.detections.iter().enumerate() {
            let b = &d.bbox;
            if !(b.w > 0.0 && b.h > 0.0) {
                return bad(format!("detection {i} has an empty box {b}"));
            }
            if b.x < 0.0 || b.y < 0.0 || b.x + b.w > self.width || b.y + b.h > self.height {
                return bad(format!("detection {i} box {b} leaves the {}x{} image", self.width, self.height));
            }
            if !(0.0..=1.0).contains(&d.score) {
                return bad(format!("detection {i} score {} outside [0, 1]", d.score));
            }
        }
        if let Some(&i) = self.captions.keys().find(|&&i| i >= self.detections.len()) {
            return bad(format!("caption for missing detection {i}"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NamingRule {
    #[default]
    None,
    NumberByIncreasingWidth,
    NumberLeftToRight,
}

/// Per-domain knowledge: detector phrases, object typing and naming.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainKnowledge {
    /// Canonical class name to detector phrase, in query order.
    pub query_elaborations: IndexMap<Name, String>,
    pub type_map: IndexMap<Name, Name>,
    #[serde(default)]
    pub fixed_objects: Vec<TypedObject>,
    #[serde(default)]
    pub naming_rules: IndexMap<Name, NamingRule>,
    /// Case ids usable as few-shot examples.
    #[serde(default)]
    pub example_pool: Vec<String>,
}

impl DomainKnowledge {
    pub fn check(&self) -> Result<(), SceneError> {
        if let Some((c, _)) = self.query_elaborations.iter().find(|(_, p)| p.trim().is_empty()) {
            return Err(SceneError::InvalidKnowledge(format!("empty phrase for `{c}`")));
        }
        for class in self.query_elaborations.keys() {
            if !self.type_map.contains_key(class) {
                return Err(SceneError::MissingType(class.clone()));
            }
        }
        Ok(())
    }

    pub fn rule(&self, class: &Name) -> NamingRule {
        self.naming_rules.get(class).copied().unwrap_or_default()
    }

    /// Canonical class for a detector label: either the elaborated phrase
    /// or the class name itself (`_` and spaces are interchangeable).
    pub fn resolve_label(&self, label: &str) -> Option<&Name> {
        let norm = normalize_label(label);
        self.query_elaborations
            .iter()
            .find(|(class, phrase)| {
                normalize_label(phrase) == norm || normalize_label(class.as_str()) == norm
            })
            .map(|(class, _)| class)
    }
}

fn normalize_label(s: &str) -> String {
    s.split(|c: char| c.is_whitespace() || c == '_')
        .filter(|w| !w.is_empty())
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

/// Detector text query: each elaborated phrase followed by `.`.
pub fn build_query(k: &DomainKnowledge) -> Result<String, SceneError> {
    if k.query_elaborations.is_empty() {
        return Err(SceneError::EmptyKnowledge);
    }
    let parts: Vec<String> = k
        .query_elaborations
        .values()
        .map(|p| format!("{}.", p.trim().trim_end_matches('.')))
        .collect();
    Ok(parts.join(" "))
}

pub const DEFAULT_THRESHOLD: f64 = 0.3;
pub const DEDUP_IOU: f64 = 0.9;

fn by_score_then_geometry(a: &Detection, b: &Detection) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then_with(|| cmp_keys(&a.bbox.key(), &b.bbox.key()))
}

fn cmp_keys(a: &[f64; 4], b: &[f64; 4]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Drops low-score detections and near-duplicate boxes of the same label,
/// keeping the higher score. Survivors keep their input order.
pub fn filter_detections(dets: &[Detection], threshold: f64) -> Vec<Detection> {
    let mut order: Vec<usize> = (0..dets.len()).filter(|&i| dets[i].score >= threshold).collect();
    order.sort_by(|&a, &b| by_score_then_geometry(&dets[a], &dets[b]));
    let mut kept: Vec<usize> = Vec::new();
    for i in order {
        let dup = kept.iter().any(|&j| {
            normalize_label(&dets[j].label) == normalize_label(&dets[i].label)
                && dets[j].bbox.iou(&dets[i].bbox) > DEDUP_IOU
        });
        if !dup {
            kept.push(i);
        }
    }
    kept.sort_unstable();
    kept.into_iter().map(|i| dets[i].clone()).collect()
}

/// A detection that became a PDDL object.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NamedDetection {
    pub object: TypedObject,
    /// Index into the annotation's detection list.
    pub detection: usize,
    #[serde(rename = "box")]
    pub bbox: BoundingBox,
}

/// Assigns canonical names to detections, in knowledge class order.
pub fn assign_names(s: &SceneAnnotation, k: &DomainKnowledge) -> Result<Vec<NamedDetection>, SceneError> {
    let mut by_class: IndexMap<&Name, Vec<usize>> =
        k.query_elaborations.keys().map(|c| (c, Vec::new())).collect();
    for (i, d) in s.detections.iter().enumerate() {
        let class = k
            .resolve_label(&d.label)
            .ok_or_else(|| SceneError::UnknownLabel(d.label.clone()))?;
        by_class[class].push(i);
    }

    let mut out = Vec::new();
    for (class, mut idx) in by_class {
        if idx.is_empty() {
            continue;
        }
        let ty = k.type_map.get(class).ok_or_else(|| SceneError::MissingType(class.clone()))?;
        let rule = k.rule(class);
        let key = |i: &usize| match rule {
            NamingRule::NumberByIncreasingWidth => s.detections[*i].bbox.w,
            _ => s.detections[*i].bbox.x,
        };
        match rule {
            NamingRule::None => {
                let best = *idx
                    .iter()
                    .min_by(|&&a, &&b| by_score_then_geometry(&s.detections[a], &s.detections[b]))
                    .expect("non-empty");
                out.push(named(s, best, class.clone(), ty));
            }
            NamingRule::NumberByIncreasingWidth | NamingRule::NumberLeftToRight => {
                idx.sort_by(|a, b| key(a).total_cmp(&key(b)));
                if let Some(w) = idx.windows(2).find(|w| key(&w[0]) == key(&w[1])) {
                    return Err(SceneError::AmbiguousNaming {
                        class: class.clone(),
                        key: key(&w[0]),
                    });
                }
                for (n, &i) in idx.iter().enumerate() {
                    let obj = Name::new(&format!("{}{}", class, n + 1))
                        .expect("class names are valid identifiers");
                    out.push(named(s, i, obj, ty));
                }
            }
        }
    }

    let mut seen = HashSet::new();
    for o in out.iter().map(|n| &n.object.name).chain(k.fixed_objects.iter().map(|o| &o.name)) {
        if !seen.insert(o) {
            return Err(SceneError::DuplicateName(o.clone()));
        }
    }
    Ok(out)
}

fn named(s: &SceneAnnotation, i: usize, name: Name, ty: &Name) -> NamedDetection {
    NamedDetection {
        object: TypedObject::new(name, ty.clone()),
        detection: i,
        bbox: s.detections[i].bbox,
    }
}

/// Objects for a scene: one per accepted detection, then the fixed objects.
pub fn detections_to_objects(
    s: &SceneAnnotation,
    k: &DomainKnowledge,
) -> Result<Vec<TypedObject>, SceneError> {
    let mut objects: Vec<TypedObject> = assign_names(s, k)?.into_iter().map(|n| n.object).collect();
    objects.extend(k.fixed_objects.iter().cloned());
    Ok(objects)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pddl::name;
    use proptest::prelude::*;

    fn knowledge(classes: &[(&str, &str, &str, NamingRule)], fixed: &[(&str, &str)]) -> DomainKnowledge {
        DomainKnowledge {
            query_elaborations: classes.iter().map(|(c, p, _, _)| (name(c), p.to_string())).collect(),
            type_map: classes.iter().map(|(c, _, t, _)| (name(c), name(t))).collect(),
            fixed_objects: fixed.iter().map(|(n, t)| TypedObject::new(name(n), name(t))).collect(),
            naming_rules: classes.iter().map(|(c, _, _, r)| (name(c), *r)).collect(),
            example_pool: vec![],
        }
    }

    fn scene(dets: Vec<Detection>) -> SceneAnnotation {
        SceneAnnotation {
            image: "scene.png".into(),
            width: 640.0,
            height: 480.0,
            detections: dets,
            captions: BTreeMap::new(),
        }
    }

    fn hanoi_knowledge() -> DomainKnowledge {
        knowledge(
            &[
                ("blue_disk", "blue disk", "disk", NamingRule::NumberByIncreasingWidth),
                ("peg", "wooden peg", "peg", NamingRule::NumberLeftToRight),
            ],
            &[],
        )
    }

    #[test]
    fn query_joins_phrases() {
        let k = knowledge(
            &[
                ("cutting_board", "round cutting board", "location", NamingRule::None),
                ("knife", "kitchen knife", "tool", NamingRule::None),
            ],
            &[],
        );
        assert_eq!(build_query(&k).unwrap(), "round cutting board. kitchen knife.");
        let single = knowledge(&[("bowl", "bowl", "location", NamingRule::None)], &[]);
        assert_eq!(build_query(&single).unwrap(), "bowl.");
        let empty = knowledge(&[], &[]);
        assert_eq!(build_query(&empty), Err(SceneError::EmptyKnowledge));
    }

    #[test]
    fn disks_numbered_by_width() {
        let s = scene(vec![
            Detection::new("blue disk", BoundingBox::new(10.0, 300.0, 55.0, 10.0), 0.9),
            Detection::new("blue disk", BoundingBox::new(10.0, 310.0, 70.0, 10.0), 0.9),
            Detection::new("blue disk", BoundingBox::new(10.0, 290.0, 40.0, 10.0), 0.9),
        ]);
        let named = assign_names(&s, &hanoi_knowledge()).unwrap();
        let got: Vec<(String, f64)> = named.iter().map(|n| (n.object.name.to_string(), n.bbox.w)).collect();
        assert_eq!(
            got,
            vec![("blue_disk1".into(), 40.0), ("blue_disk2".into(), 55.0), ("blue_disk3".into(), 70.0)]
        );
    }

    #[test]
    fn pegs_numbered_left_to_right() {
        let s = scene(vec![
            Detection::new("wooden peg", BoundingBox::new(500.0, 100.0, 10.0, 200.0), 0.8),
            Detection::new("wooden peg", BoundingBox::new(100.0, 100.0, 10.0, 200.0), 0.8),
            Detection::new("wooden peg", BoundingBox::new(300.0, 100.0, 10.0, 200.0), 0.8),
        ]);
        let objs = detections_to_objects(&s, &hanoi_knowledge()).unwrap();
        let xs: Vec<String> = objs.iter().map(|o| o.name.to_string()).collect();
        assert_eq!(xs, ["peg1", "peg2", "peg3"]);
        assert!(objs.iter().all(|o| o.ty == "peg"));
    }

    #[test]
    fn fixed_objects_appended() {
        let k = knowledge(
            &[
                ("carrot", "orange carrot", "vegetable", NamingRule::None),
                ("knife", "kitchen knife", "tool", NamingRule::None),
            ],
            &[("a_bot", "robot"), ("b_bot", "robot")],
        );
        let s = scene(vec![
            Detection::new("kitchen knife", BoundingBox::new(1.0, 1.0, 20.0, 5.0), 0.7),
            Detection::new("orange carrot", BoundingBox::new(50.0, 50.0, 20.0, 5.0), 0.7),
        ]);
        let names: Vec<String> = detections_to_objects(&s, &k)
            .unwrap()
            .iter()
            .map(|o| o.name.to_string())
            .collect();
        assert_eq!(names, ["carrot", "knife", "a_bot", "b_bot"]);
    }

    #[test]
    fn labels_resolve_by_phrase_or_class() {
        let k = hanoi_knowledge();
        assert_eq!(k.resolve_label("Blue  Disk").unwrap(), "blue_disk");
        assert_eq!(k.resolve_label("blue_disk").unwrap(), "blue_disk");
        assert_eq!(k.resolve_label("peg").unwrap(), "peg");
        assert!(k.resolve_label("red disk").is_none());
        let s = scene(vec![Detection::new("red disk", BoundingBox::new(1.0, 1.0, 5.0, 5.0), 0.9)]);
        assert_eq!(
            detections_to_objects(&s, &k),
            Err(SceneError::UnknownLabel("red disk".into()))
        );
    }

    #[test]
    fn width_tie_is_ambiguous() {
        let s = scene(vec![
            Detection::new("blue disk", BoundingBox::new(10.0, 300.0, 40.0, 10.0), 0.9),
            Detection::new("blue disk", BoundingBox::new(10.0, 310.0, 40.0, 10.0), 0.9),
        ]);
        assert!(matches!(
            assign_names(&s, &hanoi_knowledge()),
            Err(SceneError::AmbiguousNaming { .. })
        ));
    }

    #[test]
    fn unnumbered_class_keeps_best_detection() {
        let k = knowledge(&[("bowl", "white bowl", "location", NamingRule::None)], &[]);
        let s = scene(vec![
            Detection::new("white bowl", BoundingBox::new(1.0, 1.0, 5.0, 5.0), 0.4),
            Detection::new("white bowl", BoundingBox::new(100.0, 1.0, 5.0, 5.0), 0.8),
        ]);
        let n = assign_names(&s, &k).unwrap();
        assert_eq!(n.len(), 1);
        assert_eq!(n[0].detection, 1);
    }

    #[test]
    fn filter_by_threshold() {
        let dets = vec![
            Detection::new("a", BoundingBox::new(0.0, 0.0, 10.0, 10.0), 0.9),
            Detection::new("a", BoundingBox::new(100.0, 0.0, 10.0, 10.0), 0.2),
        ];
        assert_eq!(filter_detections(&dets, DEFAULT_THRESHOLD).len(), 1);
        assert_eq!(filter_detections(&dets, 0.0), dets);
    }

    #[test]
    fn filter_dedups_overlapping_boxes() {
        // 100x100 vs 100x95 at the same corner: IoU 0.95.
        let dets = vec![
            Detection::new("a", BoundingBox::new(0.0, 0.0, 100.0, 95.0), 0.7),
            Detection::new("a", BoundingBox::new(0.0, 0.0, 100.0, 100.0), 0.8),
            Detection::new("b", BoundingBox::new(0.0, 0.0, 100.0, 100.0), 0.5),
        ];
        assert!((dets[0].bbox.iou(&dets[1].bbox) - 0.95).abs() < 1e-12);
        let kept = filter_detections(&dets, 0.3);
        assert_eq!(kept, vec![dets[1].clone(), dets[2].clone()]);
    }

    #[test]
    fn iou_matches_hand_computation() {
        let a = BoundingBox::new(0.0, 0.0, 10.0, 10.0);
        let b = BoundingBox::new(5.0, 5.0, 10.0, 10.0);
        assert!((a.iou(&b) - 25.0 / 175.0).abs() < 1e-12);
        assert_eq!(a.iou(&BoundingBox::new(20.0, 0.0, 5.0, 5.0)), 0.0);
    }

    #[test]
    fn annotation_json_roundtrip() {
        let text = r#"{"image":"img.png","width":640,"height":480,
            "detections":[{"label":"blue disk","box":[10,20,30,40],"score":0.5}],
            "captions":{"0":"a blue disk"}}"#;
        let s = SceneAnnotation::from_json(text).unwrap();
        assert_eq!(s.detections[0].bbox, BoundingBox::new(10.0, 20.0, 30.0, 40.0));
        assert_eq!(s.captions[&0], "a blue disk");
        let back = SceneAnnotation::from_json(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn annotation_rejects_out_of_bounds() {
        let mut s = scene(vec![Detection::new("a", BoundingBox::new(630.0, 0.0, 20.0, 10.0), 0.5)]);
        assert!(s.check().is_err());
        s.detections[0].bbox.x = 600.0;
        assert!(s.check().is_ok());
        s.detections[0].score = 1.5;
        assert!(s.check().is_err());
    }

    fn disk_detections(widths: &[f64]) -> Vec<Detection> {
        widths
            .iter()
            .enumerate()
            .map(|(i, &w)| Detection::new("blue disk", BoundingBox::new(1.0, 10.0 * i as f64 + 1.0, w, 5.0), 0.9))
            .collect()
    }

    fn widths_and_shuffle() -> impl Strategy<Value = (Vec<Detection>, Vec<Detection>)> {
        proptest::sample::subsequence((1..60).map(|w| w as f64 * 2.0).collect::<Vec<_>>(), 1..8)
            .prop_map(|w| disk_detections(&w))
            .prop_flat_map(|d| (Just(d.clone()), Just(d).prop_shuffle()))
    }

    proptest! {
        #[test]
        fn naming_ignores_detection_order((dets, shuffled) in widths_and_shuffle()) {
            let pairs = |v: Vec<NamedDetection>| v.into_iter().map(|n| (n.object.name, n.bbox.w)).collect::<Vec<_>>();
            let base = pairs(assign_names(&scene(dets), &hanoi_knowledge()).unwrap());
            let again = pairs(assign_names(&scene(shuffled), &hanoi_knowledge()).unwrap());
            prop_assert!(base.windows(2).all(|w| w[0].1 < w[1].1));
            prop_assert_eq!(base, again);
        }
    }
}
