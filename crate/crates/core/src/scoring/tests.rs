use super::*;
use crate::dictionary::ground;
use crate::embedding::StoreKind;
use crate::error::Error;

fn unit(values: &[f32]) -> EmbeddingVector {
    EmbeddingVector::unit(values.to_vec()).unwrap()
}

/// Unit vector in the plane of e0 and e_k with cosine `c` to e0.
fn at_cos(c: f64, k: usize, dim: usize) -> Vec<f32> {
    let mut v = vec![0.0f32; dim];
    v[0] = c as f32;
    v[k] = (1.0 - c * c).sqrt() as f32;
    v
}

fn e0(dim: usize) -> Vec<f32> {
    let mut v = vec![0.0; dim];
    v[0] = 1.0;
    v
}

fn text_store(dim: usize, entries: &[(String, Vec<f32>)]) -> EmbeddingStore {
    let mut s = EmbeddingStore::new(StoreKind::Text, dim).unwrap();
    for (id, v) in entries {
        s.upsert(id.clone(), EmbeddingVector::new(v.clone()).unwrap()).unwrap();
    }
    s
}

fn image_store(dim: usize, entries: &[(&str, Vec<f32>)]) -> EmbeddingStore {
    let mut s = EmbeddingStore::new(StoreKind::Image, dim).unwrap();
    for (id, v) in entries {
        s.insert(*id, EmbeddingVector::new(v.clone()).unwrap()).unwrap();
    }
    s
}

/// Dictionary `id` whose i-th descriptor has cosine `cos[i]` with e0.
fn planted(id: &str, cos: &[f64], dim: usize, texts: &mut Vec<(String, Vec<f32>)>) -> CategoryDictionary {
    let phrases: Vec<String> = (0..cos.len()).map(|i| format!("{id} feature {i}")).collect();
    for (i, (p, &c)) in phrases.iter().zip(cos).enumerate() {
        texts.push((ground(id, p), at_cos(c, 1 + i % (dim - 1), dim)));
    }
    CategoryDictionary::new(id, id, &phrases).unwrap()
}

#[test]
fn phi_examples() {
    let a = unit(&[0.6, 0.8, 0.0, 0.0]);
    let b = unit(&[0.7, 0.0, 0.6, 0.387_298_33]);
    assert_eq!(phi(&a, &a).unwrap(), 1.0);
    assert_eq!(phi(&unit(&[1.0, 0.0]), &unit(&[0.0, 1.0])).unwrap(), 0.0);
    // 0.6 * 0.7 = 0.42
    assert!((phi(&a, &b).unwrap() - 0.42).abs() < 1e-6);
    assert!(matches!(phi(&a, &unit(&[1.0])), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn score_mean_and_max() {
    let mut texts = Vec::new();
    let dict = planted("hen", &[0.2, 0.4, 0.6], 8, &mut texts);
    let store = text_store(8, &texts);
    let image = unit(&e0(8));
    let mean = score(&dict, &image, &store, Aggregation::Mean).unwrap();
    assert!((mean.aggregate - 0.4).abs() < 1e-6);
    assert_eq!(mean.per_descriptor.len(), 3);
    assert_eq!(mean.per_descriptor[0].phrase, "hen feature 0");
    assert_eq!(mean.per_descriptor[0].grounded_text, "hen, which has hen feature 0");
    let max = score(&dict, &image, &store, Aggregation::Max).unwrap();
    assert!((max.aggregate - 0.6).abs() < 1e-6);
    assert_eq!(max.aggregation_mode, Aggregation::Max);
}

#[test]
fn score_singleton_modes_agree() {
    let mut texts = Vec::new();
    let dict = planted("owl", &[0.33], 4, &mut texts);
    let store = text_store(4, &texts);
    let image = unit(&e0(4));
    let a = score(&dict, &image, &store, Aggregation::Mean).unwrap();
    let b = score(&dict, &image, &store, Aggregation::Max).unwrap();
    assert_eq!(a.aggregate, b.aggregate);
    assert_eq!(a.aggregate, a.per_descriptor[0].phi);
}

#[test]
fn repeated_descriptor_multiset_keeps_mean() {
    let base = [0.1, 0.5, -0.2];
    let mut texts = Vec::new();
    let once = planted("x", &base, 8, &mut texts);
    let repeated: Vec<f64> = base.iter().cycle().take(9).copied().collect();
    let thrice = planted("y", &repeated, 8, &mut texts);
    let store = text_store(8, &texts);
    let image = unit(&e0(8));
    let a = score(&once, &image, &store, Aggregation::Mean).unwrap().aggregate;
    let b = score(&thrice, &image, &store, Aggregation::Mean).unwrap().aggregate;
    assert!((a - b).abs() < 1e-12);
}

#[test]
fn score_names_missing_text() {
    let dict = CategoryDictionary::new("hen", "hen", ["a beak"]).unwrap();
    let store = text_store(2, &[]);
    match score(&dict, &unit(&[1.0, 0.0]), &store, Aggregation::Mean) {
        Err(Error::MissingEmbedding(texts)) => assert_eq!(texts, ["hen, which is a beak"]),
        other => panic!("unexpected {other:?}"),
    }
}

fn two_subgroups(western: f64, japanese: f64, texts: &mut Vec<(String, Vec<f32>)>) -> SubgroupDictionarySet {
    texts.push((ground("wedding", "a tuxedo"), at_cos(western, 1, 4)));
    texts.push((ground("wedding", "a kimono"), at_cos(japanese, 2, 4)));
    SubgroupDictionarySet::new(
        "wedding",
        "wedding",
        [("western", vec!["a tuxedo"]), ("japanese", vec!["a kimono"])],
    )
    .unwrap()
}

#[test]
fn subgroup_max_wins() {
    let mut texts = Vec::new();
    let set = two_subgroups(0.3, 0.5, &mut texts);
    let store = text_store(4, &texts);
    let report = score_subgroup(&set, &unit(&e0(4)), &store, Aggregation::Mean).unwrap();
    assert_eq!(report.subgroup_name.as_deref(), Some("japanese"));
    assert!((report.aggregate - 0.5).abs() < 1e-6);
}

#[test]
fn subgroup_tie_goes_to_first_name() {
    let mut texts = Vec::new();
    let set = two_subgroups(0.4, 0.4, &mut texts);
    let store = text_store(4, &texts);
    let report = score_subgroup(&set, &unit(&e0(4)), &store, Aggregation::Mean).unwrap();
    assert_eq!(report.subgroup_name.as_deref(), Some("japanese"));
}

#[test]
fn single_subgroup_matches_plain_score() {
    let mut texts = Vec::new();
    let dict = planted("wedding", &[0.1, 0.7], 4, &mut texts);
    let store = text_store(4, &texts);
    let set = SubgroupDictionarySet::new("wedding", "wedding", [("only", dict.phrases().collect::<Vec<_>>())]).unwrap();
    let image = unit(&e0(4));
    let a = score(&dict, &image, &store, Aggregation::Mean).unwrap();
    let b = score_subgroup(&set, &image, &store, Aggregation::Mean).unwrap();
    assert_eq!(a.aggregate, b.aggregate);
    assert_eq!(a.per_descriptor, b.per_descriptor);
    assert_eq!(b.subgroup_name.as_deref(), Some("only"));
}

#[test]
fn dominant_category_wins() {
    let mut texts = Vec::new();
    let mut set = DictionarySet::new();
    set.insert(planted("a_cat", &[0.5, 0.6, 0.7], 8, &mut texts));
    set.insert(planted("b_cat", &[0.1, 0.45, 0.2], 8, &mut texts));
    let store = text_store(8, &texts);
    let images = image_store(8, &[("img", e0(8))]);
    let result = classify("img", &set, &images, &store, Aggregation::Mean).unwrap();
    assert_eq!(result.winner, "a_cat");
    assert_eq!(result.ranked_ids(), ["a_cat", "b_cat"]);
    assert_eq!(result.reports[0].category_id, "a_cat");
}

#[test]
fn exact_tie_goes_to_smaller_id() {
    let mut texts = Vec::new();
    let mut set = DictionarySet::new();
    set.insert(planted("owl", &[0.3], 4, &mut texts));
    set.insert(planted("hen", &[0.3], 4, &mut texts));
    let store = text_store(4, &texts);
    let images = image_store(4, &[("img", e0(4))]);
    let result = classify("img", &set, &images, &store, Aggregation::Mean).unwrap();
    assert_eq!(result.ranked[0].score, result.ranked[1].score);
    assert_eq!(result.winner, "hen");
}

#[test]
fn classify_errors() {
    let mut texts = Vec::new();
    let mut set = DictionarySet::new();
    set.insert(planted("hen", &[0.3], 4, &mut texts));
    let store = text_store(4, &texts);
    let images = image_store(4, &[("img", e0(4))]);
    assert!(matches!(
        classify("nope", &set, &images, &store, Aggregation::Mean),
        Err(Error::UnknownImage(_))
    ));
    set.insert(CategoryDictionary::new("owl", "owl", ["large eyes", "a beak"]).unwrap());
    match classify("img", &set, &images, &store, Aggregation::Mean) {
        Err(Error::MissingEmbedding(t)) => assert_eq!(t, ["owl, which has large eyes", "owl, which is a beak"]),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn baseline_single_template() {
    let mut set = DictionarySet::new();
    set.insert(CategoryDictionary::new("hen", "hen", ["a beak"]).unwrap());
    set.insert(CategoryDictionary::new("owl", "owl", ["large eyes"]).unwrap());
    let store = text_store(
        4,
        &[
            ("a photo of a hen".into(), at_cos(0.2, 1, 4)),
            ("a photo of a owl".into(), at_cos(0.6, 2, 4)),
        ],
    );
    let images = image_store(4, &[("img", e0(4))]);
    let r = classify_baseline("img", &set, &images, &store, &BaselineSpec::single()).unwrap();
    assert_eq!(r.winner, "owl");
    assert_eq!(r.reports[0].per_descriptor[0].phrase, "a photo of a {}");
    assert_eq!(r.reports[0].per_descriptor[0].grounded_text, "a photo of a owl");
}

#[test]
fn baseline_identical_templates_match_single() {
    let mut set = DictionarySet::new();
    set.insert(CategoryDictionary::new("hen", "hen", ["a beak"]).unwrap());
    set.insert(CategoryDictionary::new("owl", "owl", ["large eyes"]).unwrap());
    let store = text_store(
        4,
        &[
            ("a photo of a hen".into(), at_cos(0.35, 1, 4)),
            ("a photo of a owl".into(), at_cos(0.3, 2, 4)),
        ],
    );
    let images = image_store(4, &[("img", e0(4))]);
    let single = classify_baseline("img", &set, &images, &store, &BaselineSpec::single()).unwrap();
    let triple = BaselineSpec::new([DEFAULT_TEMPLATE; 3]).unwrap();
    let ensemble = classify_baseline("img", &set, &images, &store, &triple).unwrap();
    assert_eq!(single.ranked_ids(), ensemble.ranked_ids());
    for (a, b) in single.ranked.iter().zip(&ensemble.ranked) {
        assert!((a.score - b.score).abs() < 1e-15);
    }
}

#[test]
fn baseline_singleton_matches_descriptor_path() {
    let v = at_cos(0.27, 3, 4);
    let dict = CategoryDictionary::new("hen", "hen", ["feathers"]).unwrap();
    let store = text_store(
        4,
        &[(ground("hen", "feathers"), v.clone()), ("a photo of a hen".into(), v)],
    );
    let mut set = DictionarySet::new();
    set.insert(dict.clone());
    let images = image_store(4, &[("img", e0(4))]);
    let via_descriptor = score(&dict, images.get("img").unwrap(), &store, Aggregation::Mean).unwrap();
    let via_baseline = classify_baseline("img", &set, &images, &store, &BaselineSpec::single()).unwrap();
    assert_eq!(via_descriptor.aggregate, via_baseline.ranked[0].score);
}

#[test]
fn baseline_missing_rendering() {
    let mut set = DictionarySet::new();
    set.insert(CategoryDictionary::new("hen", "hen", ["a beak"]).unwrap());
    let store = text_store(4, &[]);
    let images = image_store(4, &[("img", e0(4))]);
    match classify_baseline("img", &set, &images, &store, &BaselineSpec::single()) {
        Err(Error::MissingEmbedding(t)) => assert_eq!(t, ["a photo of a hen"]),
        other => panic!("unexpected {other:?}"),
    }
}

fn hen_owl() -> ClassificationResult {
    let mut texts = Vec::new();
    let mut set = DictionarySet::new();
    texts.push((ground("hen", "feathers"), at_cos(0.27, 1, 4)));
    texts.push((ground("hen", "beak"), at_cos(0.31, 2, 4)));
    set.insert(CategoryDictionary::new("hen", "hen", ["feathers", "beak"]).unwrap());
    set.insert(planted("owl", &[0.1, 0.05], 4, &mut texts));
    let store = text_store(4, &texts);
    let images = image_store(4, &[("img", e0(4))]);
    classify("img", &set, &images, &store, Aggregation::Mean).unwrap()
}

#[test]
fn explain_sorts_bars() {
    let view = explain(&hen_owl(), None).unwrap();
    assert_eq!(view.winner, "hen");
    assert_eq!(view.panels.len(), 1);
    let phrases: Vec<_> = view.panels[0].bars.iter().map(|b| b.phrase.as_str()).collect();
    assert_eq!(phrases, ["beak", "feathers"]);
    assert!(view
        .to_json()
        .starts_with(r#"{"image_id":"img","winner":"hen","panels":"#));
}

#[test]
fn explain_contrast() {
    let result = hen_owl();
    let same = explain(&result, Some("hen")).unwrap();
    assert_eq!(same.panels[0], same.panels[1]);
    let other = explain(&result, Some("owl")).unwrap();
    assert_eq!(other.contrast.as_deref(), Some("owl"));
    assert_eq!(other.panels[1].category_id, "owl");
    assert!(matches!(explain(&result, Some("emu")), Err(Error::UnknownCategory(_))));
    assert!(other.render_text(40).contains("[contrast] owl"));
}

#[test]
fn classify_all_matches_single() {
    let mut texts = Vec::new();
    let mut set = DictionarySet::new();
    set.insert(planted("hen", &[0.3, 0.1], 4, &mut texts));
    set.insert(planted("owl", &[0.2, 0.25], 4, &mut texts));
    let store = text_store(4, &texts);
    let images = image_store(
        4,
        &[
            ("a", e0(4)),
            ("b", vec![0.0, 1.0, 0.0, 0.0]),
            ("c", vec![0.1, 0.2, 0.3, 0.4]),
        ],
    );
    let index = ScoringIndex::build(&set, &store).unwrap();
    let all = index.classify_all(&images, Aggregation::Mean).unwrap();
    assert_eq!(all.len(), 3);
    for r in &all {
        assert_eq!(
            r,
            &classify(&r.image_id, &set, &images, &store, Aggregation::Mean).unwrap()
        );
    }
}
