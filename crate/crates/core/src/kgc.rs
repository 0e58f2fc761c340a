//! Knowledge-graph-completion scoring on `Gr(n, p)`.
//!
//! Entities and relations carry `p × (n−p)` skew-block parameters. A block `B`
//! is materialized as the frame `exp([[0, B], [−Bᵀ, 0]])·Ĩ_{n,p}`; note the sign,
//! which is opposite to the tangent block used by [`crate::grassmann`].
//!
//! A triple `(s, r, o)` scores
//! `−d((A ⊗̃ S) ⊕̃ R, O)² + b_s + b_o`, where `A ⊗̃ S` materializes the entrywise
//! product `A ∘ B_S` and `d` is the principal-angle distance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{GyroError, Result};
use crate::grassmann::{identity_frame_matrix, onb_add, principal_angle_distance, GrTangentAtI, OnbFrame};
use crate::matker::Mat;

/// Largest entity count accepted by [`toy_fit`].
pub const MAX_TOY_ENTITIES: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct EntityEmbedding {
    pub b: Mat,
    pub bias: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelationEmbedding {
    pub a: Mat,
    pub b_r: Mat,
}

fn check_block(n: usize, p: usize, m: &Mat, what: &str) -> Result<()> {
    if p == 0 || p >= n || m.shape() != (p, n - p) {
        return Err(GyroError::DimMismatch(format!(
            "{what} must be {p}x{} for Gr({n}, {p}), got {}x{}",
            n.saturating_sub(p),
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|x| !x.is_finite()) {
        return Err(GyroError::NonFinite);
    }
    Ok(())
}

impl EntityEmbedding {
    pub fn new(n: usize, p: usize, b: Mat, bias: f64) -> Result<Self> {
        check_block(n, p, &b, "entity block")?;
        if !bias.is_finite() {
            return Err(GyroError::NonFinite);
        }
        Ok(EntityEmbedding { b, bias })
    }
}

impl RelationEmbedding {
    pub fn new(n: usize, p: usize, a: Mat, b_r: Mat) -> Result<Self> {
        check_block(n, p, &a, "relation scaler")?;
        check_block(n, p, &b_r, "relation translation")?;
        Ok(RelationEmbedding { a, b_r })
    }
}

/// `exp([[0, B], [−Bᵀ, 0]])·Ĩ_{n,p}` where `B` is `p × (n−p)`.
pub fn materialize(b: &Mat) -> Result<OnbFrame> {
    let n = b.nrows() + b.ncols();
    let x = GrTangentAtI::new(n, -b)?;
    OnbFrame::from_closed_form(x.flow() * identity_frame_matrix(n, b.nrows()))
}

/// `A ⊗̃ S = materialize(A ∘ B_S)`
pub fn relation_apply(a: &Mat, b: &Mat) -> Result<OnbFrame> {
    if a.shape() != b.shape() {
        return Err(GyroError::DimMismatch(format!(
            "scaler {:?} and block {:?}",
            a.shape(),
            b.shape()
        )));
    }
    materialize(&a.component_mul(b))
}

/// Composed point `(A ⊗̃ S) ⊕̃ R` that the object is compared against.
pub fn compose(s: &EntityEmbedding, r: &RelationEmbedding) -> Result<OnbFrame> {
    onb_add(&relation_apply(&r.a, &s.b)?, &materialize(&r.b_r)?)
}

/// Score of an object frame against a composed point.
pub fn score_frame(head: &OnbFrame, object: &OnbFrame, b_s: f64, b_o: f64) -> Result<f64> {
    let d = principal_angle_distance(head, object)?;
    Ok(-d * d + b_s + b_o)
}

/// `−d((A ⊗̃ S) ⊕̃ R, O)² + b_s + b_o`
pub fn score(s: &EntityEmbedding, r: &RelationEmbedding, o: &EntityEmbedding) -> Result<f64> {
    score_frame(&compose(s, r)?, &materialize(&o.b)?, s.bias, o.bias)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankMetrics {
    pub mrr: f64,
    pub hits1: f64,
    pub hits3: f64,
    pub hits10: f64,
}

/// Rank of `truth` among `scores`, counting every candidate scored at least as
/// high (ties rank pessimistically).
pub fn pessimistic_rank(scores: &[f64], truth: usize) -> usize {
    let t = scores[truth];
    scores.iter().filter(|&&s| s >= t).count()
}

/// Mean reciprocal rank and hits at 1, 3 and 10 over a batch of queries.
pub fn rank_metrics(scores: &[Vec<f64>], truth: &[usize]) -> Result<RankMetrics> {
    if scores.len() != truth.len() {
        return Err(GyroError::DimMismatch(format!(
            "{} score lists for {} truth indices",
            scores.len(),
            truth.len()
        )));
    }
    if scores.is_empty() {
        return Err(GyroError::EmptyQuery(0));
    }
    let mut acc = [0.0; 4];
    for (q, (s, &t)) in scores.iter().zip(truth).enumerate() {
        if s.is_empty() {
            return Err(GyroError::EmptyQuery(q));
        }
        if t >= s.len() {
            return Err(GyroError::InvalidConfig(format!(
                "query {q}: truth index {t} out of {} candidates",
                s.len()
            )));
        }
        if s.iter().any(|x| !x.is_finite()) {
            return Err(GyroError::NonFinite);
        }
        let rank = pessimistic_rank(s, t);
        acc[0] += 1.0 / rank as f64;
        acc[1] += (rank <= 1) as u8 as f64;
        acc[2] += (rank <= 3) as u8 as f64;
        acc[3] += (rank <= 10) as u8 as f64;
    }
    let q = scores.len() as f64;
    Ok(RankMetrics {
        mrr: acc[0] / q,
        hits1: acc[1] / q,
        hits3: acc[2] / q,
        hits10: acc[3] / q,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityRecord {
    pub name: String,
    #[serde(rename = "B")]
    pub b: Vec<Vec<f64>>,
    pub bias: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationRecord {
    pub name: String,
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    #[serde(rename = "B_R")]
    pub b_r: Vec<Vec<f64>>,
}

/// Serialized form of a [`KgcModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KgcModelDocument {
    pub n: usize,
    pub p: usize,
    pub entities: Vec<EntityRecord>,
    pub relations: Vec<RelationRecord>,
}

fn rows_to_mat(rows: &[Vec<f64>], r: usize, c: usize, what: &str) -> Result<Mat> {
    if rows.len() != r || rows.iter().any(|row| row.len() != c) {
        return Err(GyroError::DimMismatch(format!("{what} must be {r}x{c}")));
    }
    Ok(Mat::from_fn(r, c, |i, j| rows[i][j]))
}

fn mat_to_rows(m: &Mat) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

/// Named entity and relation embeddings sharing one `Gr(n, p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KgcModel {
    n: usize,
    p: usize,
    pub entity_names: Vec<String>,
    pub entities: Vec<EntityEmbedding>,
    pub relation_names: Vec<String>,
    pub relations: Vec<RelationEmbedding>,
}

impl KgcModel {
    pub fn new(n: usize, p: usize) -> Result<Self> {
        if p == 0 || p >= n {
            return Err(GyroError::DimMismatch(format!("need 1 ≤ p < n, got n={n}, p={p}")));
        }
        Ok(KgcModel {
            n,
            p,
            entity_names: Vec::new(),
            entities: Vec::new(),
            relation_names: Vec::new(),
            relations: Vec::new(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn push_entity(&mut self, name: impl Into<String>, e: EntityEmbedding) -> Result<usize> {
        check_block(self.n, self.p, &e.b, "entity block")?;
        self.entity_names.push(name.into());
        self.entities.push(e);
        Ok(self.entities.len() - 1)
    }

    pub fn push_relation(&mut self, name: impl Into<String>, r: RelationEmbedding) -> Result<usize> {
        check_block(self.n, self.p, &r.a, "relation scaler")?;
        check_block(self.n, self.p, &r.b_r, "relation translation")?;
        self.relation_names.push(name.into());
        self.relations.push(r);
        Ok(self.relations.len() - 1)
    }

    pub fn entity_index(&self, name: &str) -> Option<usize> {
        self.entity_names.iter().position(|n| n == name)
    }

    pub fn relation_index(&self, name: &str) -> Option<usize> {
        self.relation_names.iter().position(|n| n == name)
    }

    pub fn score(&self, s: usize, r: usize, o: usize) -> Result<f64> {
        let get = |len: usize, i: usize, what: &str| {
            if i < len {
                Ok(())
            } else {
                Err(GyroError::InvalidConfig(format!("{what} index {i} out of {len}")))
            }
        };
        get(self.entities.len(), s, "subject")?;
        get(self.relations.len(), r, "relation")?;
        get(self.entities.len(), o, "object")?;
        score(&self.entities[s], &self.relations[r], &self.entities[o])
    }

    /// Scores of every entity as the object of `(s, r, ·)`.
    pub fn object_scores(&self, s: usize, r: usize) -> Result<Vec<f64>> {
        let head = compose(&self.entities[s], &self.relations[r])?;
        let bs = self.entities[s].bias;
        self.entities
            .iter()
            .map(|o| score_frame(&head, &materialize(&o.b)?, bs, o.bias))
            .collect()
    }

    /// Ranks the true object of each triple against all entities.
    pub fn evaluate(&self, triples: &[(usize, usize, usize)]) -> Result<RankMetrics> {
        let mut scores = Vec::with_capacity(triples.len());
        let mut truth = Vec::with_capacity(triples.len());
        for &(s, r, o) in triples {
            scores.push(self.object_scores(s, r)?);
            truth.push(o);
        }
        rank_metrics(&scores, &truth)
    }

    pub fn to_document(&self) -> KgcModelDocument {
        KgcModelDocument {
            n: self.n,
            p: self.p,
            entities: self
                .entity_names
                .iter()
                .zip(&self.entities)
                .map(|(name, e)| EntityRecord {
                    name: name.clone(),
                    b: mat_to_rows(&e.b),
                    bias: e.bias,
                })
                .collect(),
            relations: self
                .relation_names
                .iter()
                .zip(&self.relations)
                .map(|(name, r)| RelationRecord {
                    name: name.clone(),
                    a: mat_to_rows(&r.a),
                    b_r: mat_to_rows(&r.b_r),
                })
                .collect(),
        }
    }

    pub fn from_document(doc: &KgcModelDocument) -> Result<Self> {
        let mut model = KgcModel::new(doc.n, doc.p)?;
        let (r, c) = (doc.p, doc.n - doc.p);
        for e in &doc.entities {
            let b = rows_to_mat(&e.b, r, c, &format!("entity {:?} B", e.name))?;
            model.push_entity(e.name.clone(), EntityEmbedding::new(doc.n, doc.p, b, e.bias)?)?;
        }
        for rel in &doc.relations {
            let a = rows_to_mat(&rel.a, r, c, &format!("relation {:?} A", rel.name))?;
            let b_r = rows_to_mat(&rel.b_r, r, c, &format!("relation {:?} B_R", rel.name))?;
            model.push_relation(rel.name.clone(), RelationEmbedding::new(doc.n, doc.p, a, b_r)?)?;
        }
        Ok(model)
    }
}

/// Mean logistic loss of the true triples against every corrupted object.
fn toy_loss(model: &KgcModel, triples: &[(usize, usize, usize)]) -> Result<f64> {
    let softplus = |x: f64| if x > 30.0 { x } else { x.exp().ln_1p() };
    let mut total = 0.0;
    for &(s, r, o) in triples {
        let scores = model.object_scores(s, r)?;
        let neg = scores.len().saturating_sub(1).max(1) as f64;
        for (j, sc) in scores.iter().enumerate() {
            total += if j == o { softplus(-sc) } else { softplus(*sc) / neg };
        }
    }
    Ok(total / triples.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ToyFitReport {
    pub initial_loss: f64,
    pub final_loss: f64,
    pub metrics: RankMetrics,
}

/// Gradient-free random-search fit of a small model: perturb one parameter
/// block at a time and keep the move if the loss drops.
pub fn toy_fit(
    model: &mut KgcModel,
    triples: &[(usize, usize, usize)],
    iterations: usize,
    step: f64,
    seed: u64,
) -> Result<ToyFitReport> {
    if model.entities.len() > MAX_TOY_ENTITIES {
        return Err(GyroError::InvalidConfig(format!(
            "toy fit takes at most {MAX_TOY_ENTITIES} entities, got {}",
            model.entities.len()
        )));
    }
    if triples.is_empty() || model.relations.is_empty() {
        return Err(GyroError::InvalidConfig("toy fit needs triples and relations".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let initial_loss = toy_loss(model, triples)?;
    let mut loss = initial_loss;
    let (p, q) = (model.p, model.n - model.p);
    let ne = model.entities.len();
    for _ in 0..iterations {
        let slot = rng.random_range(0..ne + model.relations.len());
        let noise = Mat::from_fn(p, q, |_, _| step * rng.sample::<f64, _>(StandardNormal));
        let bump: f64 = step * rng.sample::<f64, _>(StandardNormal);
        let mut cand = model.clone();
        if slot < ne {
            let e = &mut cand.entities[slot];
            e.b += &noise;
            e.bias += bump;
        } else {
            let r = &mut cand.relations[slot - ne];
            r.b_r += &noise;
        }
        match toy_loss(&cand, triples) {
            Ok(l) if l < loss => {
                loss = l;
                *model = cand;
            }
            Ok(_) | Err(GyroError::CutLocus(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(ToyFitReport {
        initial_loss,
        final_loss: loss,
        metrics: model.evaluate(triples)?,
    })
}

/// A small random model with `entities` entities and `relations` relations,
/// blocks drawn with standard deviation `scale`, unit relation scalers.
pub fn random_model(n: usize, p: usize, entities: usize, relations: usize, scale: f64, seed: u64) -> Result<KgcModel> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut model = KgcModel::new(n, p)?;
    let q = n - p;
    let draw = |rng: &mut ChaCha8Rng| Mat::from_fn(p, q, |_, _| scale * rng.sample::<f64, _>(StandardNormal));
    for i in 0..entities {
        let b = draw(&mut rng);
        model.push_entity(format!("e{i}"), EntityEmbedding::new(n, p, b, 0.0)?)?;
    }
    for i in 0..relations {
        let b_r = draw(&mut rng);
        model.push_relation(format!("r{i}"), RelationEmbedding::new(n, p, Mat::from_element(p, q, 1.0), b_r)?)?;
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn scalar(x: f64) -> Mat {
        Mat::from_element(1, 1, x)
    }

    #[test]
    fn materialize_examples() {
        let id = materialize(&Mat::zeros(2, 3)).unwrap();
        assert_eq!(id.as_mat(), &identity_frame_matrix(5, 2));
        let t = 0.8;
        let u = materialize(&scalar(t)).unwrap();
        assert!((u.as_mat()[(0, 0)] - t.cos()).abs() < 1e-15);
        assert!((u.as_mat()[(1, 0)] + t.sin()).abs() < 1e-15);
        let b = Mat::from_row_slice(2, 2, &[0.3, -0.4, 0.1, 0.9]);
        let f = materialize(&b).unwrap();
        assert!((f.as_mat().transpose() * f.as_mat() - Mat::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn relation_apply_examples() {
        let b = Mat::from_row_slice(2, 2, &[0.3, -0.4, 0.1, 0.9]);
        let ones = Mat::from_element(2, 2, 1.0);
        assert_eq!(relation_apply(&ones, &b).unwrap(), materialize(&b).unwrap());
        let id = relation_apply(&Mat::zeros(2, 2), &b).unwrap();
        assert_eq!(id.as_mat(), &identity_frame_matrix(4, 2));
        let u = relation_apply(&scalar(3.0), &scalar(0.2)).unwrap();
        let angle = (-u.as_mat()[(1, 0)]).atan2(u.as_mat()[(0, 0)]);
        assert!((angle - 0.6).abs() < 1e-14);
        assert!(matches!(relation_apply(&Mat::zeros(1, 2), &b), Err(GyroError::DimMismatch(_))));
    }

    #[test]
    fn trivial_score_is_bias_sum() {
        let s = EntityEmbedding::new(5, 2, Mat::zeros(2, 3), 0.25).unwrap();
        let o = EntityEmbedding::new(5, 2, Mat::zeros(2, 3), -1.5).unwrap();
        let r = RelationEmbedding::new(5, 2, Mat::from_element(2, 3, 1.0), Mat::zeros(2, 3)).unwrap();
        assert_eq!(score(&s, &r, &o).unwrap(), 0.25 + -1.5);
    }

    #[test]
    fn score_decreases_away_from_composition() {
        let s = EntityEmbedding::new(2, 1, scalar(0.2), 0.0).unwrap();
        let r = RelationEmbedding::new(2, 1, scalar(1.0), scalar(0.3)).unwrap();
        let mut last = f64::INFINITY;
        for k in 0..8 {
            let o = EntityEmbedding::new(2, 1, scalar(0.5 + 0.1 * k as f64), 0.0).unwrap();
            let sc = score(&s, &r, &o).unwrap();
            assert!(sc < last || k == 0);
            last = sc;
        }
        let o = EntityEmbedding::new(2, 1, scalar(0.5), 0.0).unwrap();
        assert!(score(&s, &r, &o).unwrap().abs() < 1e-14);
    }

    #[test]
    fn rank_examples() {
        let m = rank_metrics(&[vec![3.0, 1.0, 2.0]], &[0]).unwrap();
        assert_eq!((m.mrr, m.hits1), (1.0, 1.0));
        let scores: Vec<f64> = (0..10).map(|i| 10.0 - i as f64).collect();
        let m = rank_metrics(&[scores], &[3]).unwrap();
        assert_eq!((m.mrr, m.hits1, m.hits3, m.hits10), (0.25, 0.0, 0.0, 1.0));
        let tied = rank_metrics(&[vec![1.0, 1.0, 1.0]], &[0]).unwrap();
        assert_eq!(tied.mrr, 1.0 / 3.0);
        assert_eq!(rank_metrics(&[vec![1.0], vec![]], &[0, 0]), Err(GyroError::EmptyQuery(1)));
    }

    #[test]
    fn document_roundtrip() {
        let model = random_model(4, 2, 3, 2, 0.3, 1).unwrap();
        let text = serde_json::to_string(&model.to_document()).unwrap();
        let back = KgcModel::from_document(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, model);
        assert_eq!(back.score(0, 1, 2).unwrap(), model.score(0, 1, 2).unwrap());
    }

    #[test]
    fn toy_fit_improves_ranking() {
        let mut model = random_model(4, 2, 8, 2, 0.3, 3).unwrap();
        let triples: Vec<_> = (0..8).map(|i| (i, i % 2, (i + 1 + i % 2) % 8)).collect();
        let rep = toy_fit(&mut model, &triples, 600, 0.1, 5).unwrap();
        assert!(rep.final_loss < rep.initial_loss);
        assert!(rep.metrics.mrr > 0.5, "{rep:?}");
        let mut too_big = random_model(3, 1, 21, 1, 0.1, 0).unwrap();
        assert!(matches!(toy_fit(&mut too_big, &triples, 1, 0.1, 0), Err(GyroError::InvalidConfig(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn rotation_of_object_frame_keeps_score(seed in 0u64..1000, ov in proptest::collection::vec(-1.0f64..1.0, 4)) {
            let model = random_model(5, 2, 3, 1, 0.3, seed).unwrap();
            let head = compose(&model.entities[0], &model.relations[0]).unwrap();
            let obj = materialize(&model.entities[1].b).unwrap();
            let o = nalgebra::QR::new(Mat::from_row_slice(2, 2, &ov) + Mat::identity(2, 2) * 2.0).q();
            let a = score_frame(&head, &obj, 0.0, 0.0).unwrap();
            let b = score_frame(&head, &obj.rotate(&o).unwrap(), 0.0, 0.0).unwrap();
            prop_assert!((a - b).abs() < 1e-10);
        }

        #[test]
        fn rank_is_permutation_equivariant(scores in proptest::collection::vec(-3i32..3, 1..12), shift in 0usize..12) {
            let s: Vec<f64> = scores.iter().map(|&x| x as f64).collect();
            let t = shift % s.len();
            let k = s.len();
            let perm: Vec<usize> = (0..k).map(|i| (i + 5) % k).collect();
            let permuted: Vec<f64> = perm.iter().map(|&i| s[i]).collect();
            let pt = perm.iter().position(|&i| i == t).unwrap();
            prop_assert_eq!(pessimistic_rank(&s, t), pessimistic_rank(&permuted, pt));
        }
    }
}
