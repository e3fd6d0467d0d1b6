use std::sync::atomic::{AtomicUsize, Ordering};

use qias_core::retrieval::{
    build_index, embed, query_top_k, EmbeddingProvider, HashedBowEmbedder, Index, Passage,
    RetrievalError,
};

fn passages(texts: &[&str]) -> Vec<Passage> {
    texts
        .iter()
        .enumerate()
        .map(|(i, t)| Passage {
            id: format!("p{}", i + 1),
            text: t.to_string(),
            source: None,
        })
        .collect()
}

fn cosine(a: &[f32], b: &[f32]) -> f32 {
    let dot: f32 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f32 = a.iter().map(|x| x * x).sum::<f32>().sqrt();
    let nb: f32 = b.iter().map(|x| x * x).sum::<f32>().sqrt();
    dot / (na * nb)
}

/// Returns dimension 8 on the first call, 16 afterwards.
struct Shifting(AtomicUsize);

impl EmbeddingProvider for Shifting {
    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f32>>, RetrievalError> {
        let call = self.0.fetch_add(1, Ordering::SeqCst);
        let dim = if call == 0 { 8 } else { 16 };
        Ok(texts.iter().map(|_| vec![1.0; dim]).collect())
    }
}

#[test]
fn small_index_and_k_clamp() {
    let e = HashedBowEmbedder { dim: 8 };
    let idx = build_index(passages(&["الابن عصبة", "للزوج النصف", "للأم الثلث"]), &e).unwrap();
    assert_eq!(idx.len(), 3);
    assert_eq!(idx.dim(), 8);
    let hits = query_top_k(&idx, &e, "الزوج", 5).unwrap();
    assert_eq!(hits.len(), 3);
}

#[test]
fn dim_mismatch_between_calls() {
    let p = Shifting(AtomicUsize::new(0));
    let idx = build_index(passages(&["a", "b"]), &p).unwrap();
    assert_eq!(idx.dim(), 8);
    match query_top_k(&idx, &p, "q", 1) {
        Err(RetrievalError::EmbeddingDimMismatch {
            expected: 8,
            got: 16,
        }) => {}
        other => panic!("expected dim mismatch, got {other:?}"),
    }
}

#[test]
fn self_query_scores_one() {
    let e = HashedBowEmbedder::default();
    let docs = [
        "يرث الابن جميع المال",
        "للزوجة الربع عند عدم الفرع",
        "الجدة تأخذ السدس",
    ];
    let idx = build_index(passages(&docs), &e).unwrap();
    for (i, d) in docs.iter().enumerate() {
        let hits = query_top_k(&idx, &e, d, 1).unwrap();
        assert_eq!(hits[0].id, format!("p{}", i + 1));
        assert!(hits[0].score >= 1.0 - 1e-6);
    }
}

#[test]
fn hand_built_vectors() {
    let s = std::f32::consts::FRAC_1_SQRT_2;
    let vecs = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![s, s]];
    let idx = Index::from_vectors(passages(&["x", "y", "z"]), vecs.clone()).unwrap();
    let q = [1.0, 0.0];
    let hits = idx.query_vector(&q, 3).unwrap();
    let ids: Vec<&str> = hits.iter().map(|h| h.id.as_str()).collect();
    assert_eq!(ids, ["p1", "p3", "p2"]);
    for h in &hits {
        let i: usize = h.id[1..].parse::<usize>().unwrap() - 1;
        assert!((h.score - cosine(&q, &vecs[i])).abs() < 1e-6);
    }
    assert!((hits[1].score - s).abs() < 1e-6);
    assert!(hits[2].score.abs() < 1e-6);
}

#[test]
fn persistence_round_trip() {
    let e = HashedBowEmbedder::default();
    let idx = build_index(
        passages(&["الأب يحجب الجد", "الأم تحجب الجدة", "الابن يحجب ابن الابن"]),
        &e,
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("index.json");
    idx.save(&path).unwrap();
    let back = Index::load(&path).unwrap();
    let a = serde_json::to_vec(&query_top_k(&idx, &e, "الجد", 3).unwrap()).unwrap();
    let b = serde_json::to_vec(&query_top_k(&back, &e, "الجد", 3).unwrap()).unwrap();
    assert_eq!(a, b);
}

#[test]
fn embedding_examples() {
    let e = HashedBowEmbedder::default();
    let v = embed(&e, &["نص".to_string(), "نص".to_string()]).unwrap();
    assert_eq!(v[0], v[1]);
    assert!(matches!(
        embed(&e, &[String::new()]),
        Err(RetrievalError::EmptyInput)
    ));

    // vocabulary chosen so no bucket is shared
    let (a, b) = ("alpha beta", "gamma delta");
    let ba: Vec<usize> = a.split(' ').map(|t| e.bucket(t)).collect();
    let bb: Vec<usize> = b.split(' ').map(|t| e.bucket(t)).collect();
    assert!(ba.iter().all(|x| !bb.contains(x)));
    let v = embed(&e, &[a.to_string(), b.to_string()]).unwrap();
    assert_eq!(cosine(&v[0], &v[1]), 0.0);
}

#[test]
fn empty_corpus() {
    assert!(matches!(
        build_index(Vec::new(), &HashedBowEmbedder::default()),
        Err(RetrievalError::EmptyCorpus)
    ));
}
