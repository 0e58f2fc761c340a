use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{
    gen_onb, gen_onb_within, gen_spd, rel_residual, rel_residual_scalar, Dim, Property, Recorder,
    SuiteId, Tolerance,
};
use crate::error::Result;
use crate::grassmann::{
    gr_add, gr_exp_identity, gr_gyr, gr_gyrodistance, gr_inverse, gr_log_identity, gr_norm,
    gr_scale, onb_add, onb_gyr, onb_inverse, onb_scale, principal_angle_distance, tau, OnbFrame,
    Projector,
};
use crate::kgc::{
    materialize, pessimistic_rank, rank_metrics, relation_apply, score, EntityEmbedding,
    RelationEmbedding,
};
use crate::matker::{
    cholesky, congruence, frechet_dexp, frechet_dlog, mat_exp, mat_log_spd, spd_sqrt, Mat,
    SpdMatrix, SymMatrix,
};
use crate::spd_gyro::{
    gyrotriangle_laws, lt_add, spd_add, spd_exp, spd_gyr, spd_gyrodistance, spd_inverse, spd_log,
    spd_scale, spd_transport_identity, SpdMetric,
};
use crate::spd_mlr::{
    argmax, blockdiag_dist, blockdiag_dist_assembled, dist_le, dist_lc, plane_distance_numeric,
    pseudodist_ai, pseudodist_numeric, softmax, BlockDiagSet, Hypergyroplane, DEFAULT_BUDGET,
};

/// Bound on the principal-angle norm of frames in the composite Grassmann
/// checks; keeps every intermediate of up to four sums clear of the cut locus.
const GR_RADIUS: f64 = std::f64::consts::PI / 10.0;
/// Bound for the single-point Exp∘Log roundtrip.
const GR_WIDE_RADIUS: f64 = 1.4;
/// On-plane draws for the distance lower-bound check.
const PLANE_SAMPLES: usize = 1000;

pub(super) type Body = fn(&mut ChaCha8Rng, Dim, &mut Recorder) -> Result<()>;

pub(super) fn body(id: SuiteId) -> Body {
    match id {
        SuiteId::SpdAxioms => spd_axioms,
        SuiteId::SpdIsometries => spd_isometries,
        SuiteId::SpdMlr => spd_mlr,
        SuiteId::GrAxioms => gr_axioms,
        SuiteId::GrIsometries => gr_isometries,
        SuiteId::GrOnbConsistency => gr_onb_consistency,
        SuiteId::Kernels => kernels,
        SuiteId::Kgc => kgc,
    }
}

const fn prop(name: &'static str, suite: SuiteId, anchor: &'static str, tolerance: Tolerance) -> Property {
    Property {
        name,
        suite,
        anchor,
        tolerance,
    }
}

use SuiteId as S;
use Tolerance as T;

pub(super) static REGISTRY: &[Property] = &[
    prop("spd.g1_left_identity", S::SpdAxioms, "gyrogroup axiom G1: I ⊕ P = P", T::Suite),
    prop("spd.g2_left_inverse", S::SpdAxioms, "gyrogroup axiom G2: ⊖P ⊕ P = I", T::Suite),
    prop("spd.g3_left_gyroassociative", S::SpdAxioms, "gyrogroup axiom G3: left gyroassociative law", T::Suite),
    prop("spd.g4_left_reduction", S::SpdAxioms, "gyrogroup axiom G4: left reduction property", T::Suite),
    prop("spd.gyrocommutative", S::SpdAxioms, "gyrocommutative law", T::Suite),
    prop("spd.v1_scalar_identities", S::SpdAxioms, "gyrovector axiom V1: 1⊙P = P, 0⊙P = t⊙I = I, (−1)⊙P = ⊖P", T::Suite),
    prop("spd.v2_scalar_distributive", S::SpdAxioms, "gyrovector axiom V2: (s+t)⊙P = s⊙P ⊕ t⊙P", T::Suite),
    prop("spd.v3_scalar_associative", S::SpdAxioms, "gyrovector axiom V3: (st)⊙P = s⊙(t⊙P)", T::Suite),
    prop("spd.v4_gyration_scaling", S::SpdAxioms, "gyrovector axiom V4: gyr[A,B](t⊙P) = t⊙gyr[A,B]P", T::Suite),
    prop("spd.v5_collinear_gyration", S::SpdAxioms, "gyrovector axiom V5: gyr[s⊙P, t⊙P] = Id", T::Suite),
    prop("spd.left_cancellation", S::SpdAxioms, "left cancellation law: ⊖P ⊕ (P ⊕ Q) = Q", T::Suite),
    prop("spd.transported_log", S::SpdAxioms, "P ⊕ Q = Exp_P(T_{I→P}(Log_I Q))", T::AtMost(1e-9)),
    prop("spd.cholesky_square", S::SpdAxioms, "φ(P ⊕_lc Q) = φ(P) ⊕_lt φ(Q)", T::AtMost(1e-9)),
    prop("spd.left_translation_isometry", S::SpdIsometries, "left gyrotranslations are gyroisometries", T::Suite),
    prop("spd.gyration_isometry", S::SpdIsometries, "gyrations are gyroisometries", T::Suite),
    prop("spd.inverse_isometry", S::SpdIsometries, "the inverse map is a gyroisometry", T::Suite),
    prop("spd.gyrocosine_law", S::SpdIsometries, "law of SPD gyrocosines", T::Suite),
    prop("spd.gyrosine_law", S::SpdIsometries, "law of SPD gyrosines", T::Suite),
    prop("mlr.lower_bound", S::SpdMlr, "closed-form plane distance ≤ every on-plane gyrodistance (1e-9 slack)", T::Fixed(0.0)),
    prop("mlr.refined_minimum", S::SpdMlr, "refined on-plane minimum equals the closed form", T::Fixed(1e-3)),
    prop("mlr.pseudo_equals_true", S::SpdMlr, "pseudo-gyrodistance equals gyrodistance for flat metrics", T::Fixed(1e-3)),
    prop("mlr.ai_pseudodistance", S::SpdMlr, "affine-invariant pseudo-gyrodistance closed form", T::Fixed(1e-3)),
    prop("mlr.block_diagonal", S::SpdMlr, "block-diagonal distance aggregates per block", T::AtMost(1e-9)),
    prop("mlr.softmax_normalized", S::SpdMlr, "softmax sums to one", T::AtMost(1e-12)),
    prop("mlr.argmax_shift_invariant", S::SpdMlr, "argmax unchanged by a common logit shift", T::Fixed(0.0)),
    prop("gr.g1_left_identity", S::GrAxioms, "gyrogroup axiom G1", T::Suite),
    prop("gr.g2_left_inverse", S::GrAxioms, "gyrogroup axiom G2", T::Suite),
    prop("gr.g3_left_gyroassociative", S::GrAxioms, "gyrogroup axiom G3", T::Suite),
    prop("gr.g4_left_reduction", S::GrAxioms, "gyrogroup axiom G4", T::Suite),
    prop("gr.gyrocommutative", S::GrAxioms, "gyrocommutative law", T::Suite),
    prop("gr.left_translation_isometry", S::GrIsometries, "left Grassmann gyrotranslations are gyroisometries", T::Suite),
    prop("gr.gyration_isometry", S::GrIsometries, "Grassmann gyrations are gyroisometries", T::Suite),
    prop("gr.gyration_norm", S::GrIsometries, "Grassmann gyrations preserve the norm", T::Suite),
    prop("gr.inverse_isometry", S::GrIsometries, "the Grassmann inverse map is a gyroisometry", T::Suite),
    prop("gr.tau_add", S::GrOnbConsistency, "τ(U ⊕̃ V) = τ(U) ⊕ τ(V)", T::AtMost(1e-9)),
    prop("gr.tau_scale", S::GrOnbConsistency, "τ(t ⊗̃ U) = t ⊗ τ(U)", T::AtMost(1e-9)),
    prop("gr.tau_gyr", S::GrOnbConsistency, "τ(g̃yr[U,V]W) = gyr[τU,τV]τW", T::AtMost(1e-9)),
    prop("gr.exp_log_roundtrip", S::GrOnbConsistency, "Exp_I ∘ Log_I = id away from the cut locus", T::AtMost(1e-9)),
    prop("gr.pangle_basis_invariance", S::GrOnbConsistency, "principal-angle distance of U and U·O vanishes", T::AtMost(1e-10)),
    prop("kern.exp_log_roundtrip", S::Kernels, "exp(log P) = P", T::AtMost(1e-10)),
    prop("kern.cholesky_roundtrip", S::Kernels, "L·Lᵀ = P", T::AtMost(1e-12)),
    prop("kern.dlog_second_order", S::Kernels, "central differences of log converge at second order (ratio in [3,5])", T::Fixed(0.0)),
    prop("kern.dexp_dlog_identity", S::Kernels, "Dexp ∘ Dlog = id on tangents", T::AtMost(1e-9)),
    prop("kgc.trivial_score", S::Kgc, "all parameters at the identity score b_s + b_o", T::Fixed(0.0)),
    prop("kgc.object_rotation_invariance", S::Kgc, "score depends on the object subspace only", T::AtMost(1e-10)),
    prop("kgc.zero_relation_reduction", S::Kgc, "zero relation translation reduces to −d(A⊗̃S, O)² + b_s + b_o", T::Suite),
    prop("kgc.rank_permutation_equivariance", S::Kgc, "ranks follow candidate permutations", T::Fixed(0.0)),
    prop("kgc.rank_oracle", S::Kgc, "rank metrics match a sorting oracle", T::Fixed(0.0)),
];

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.random_range(lo..=hi)
}

fn gaussian(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Mat {
    Mat::from_fn(r, c, |_, _| rng.sample(StandardNormal))
}

fn random_sym(rng: &mut ChaCha8Rng, n: usize) -> SymMatrix {
    SymMatrix::from_symmetric_part(&gaussian(rng, n, n))
}

fn spd(rng: &mut ChaCha8Rng, n: usize, rec: &mut Recorder) -> Result<SpdMatrix> {
    let s = gen_spd(rng, n)?;
    rec.note_condition(s.condition);
    Ok(s.point)
}

fn spd_axioms(rng: &mut ChaCha8Rng, dim: Dim, rec: &mut Recorder) -> Result<()> {
    let n = dim.n;
    let (p, q, r) = (spd(rng, n, rec)?, spd(rng, n, rec)?, spd(rng, n, rec)?);
    let (s, t) = (uniform(rng, -2.0, 2.0), uniform(rng, -2.0, 2.0));
    let id = SpdMatrix::identity(n);
    for m in SpdMetric::ALL {
        let add = |a: &SpdMatrix, b: &SpdMatrix| spd_add(m, a, b);
        let inv = |a: &SpdMatrix| spd_inverse(m, a);
        let gyr = |a: &SpdMatrix, b: &SpdMatrix, c: &SpdMatrix| spd_gyr(m, a, b, c);
        let scale = |k: f64, a: &SpdMatrix| spd_scale(m, k, a);
        let res = |a: &SpdMatrix, b: &SpdMatrix| rel_residual(a.as_mat(), b.as_mat());
        let tag = m.tag();

        rec.check(format!("spd.g1_left_identity/{tag}"), || Ok(res(&add(&id, &p)?, &p)));
        rec.check(format!("spd.g2_left_inverse/{tag}"), || Ok(res(&add(&inv(&p)?, &p)?, &id)));
        rec.check(format!("spd.g3_left_gyroassociative/{tag}"), || {
            let lhs = add(&p, &add(&q, &r)?)?;
            let rhs = add(&add(&p, &q)?, &gyr(&p, &q, &r)?)?;
            Ok(res(&lhs, &rhs))
        });
        rec.check(format!("spd.g4_left_reduction/{tag}"), || {
            Ok(res(&gyr(&p, &q, &r)?, &gyr(&add(&p, &q)?, &q, &r)?))
        });
        rec.check(format!("spd.gyrocommutative/{tag}"), || {
            Ok(res(&add(&p, &q)?, &gyr(&p, &q, &add(&q, &p)?)?))
        });
        rec.check(format!("spd.v1_scalar_identities/{tag}"), || {
            Ok(res(&scale(1.0, &p)?, &p)
                .max(res(&scale(0.0, &p)?, &id))
                .max(res(&scale(t, &id)?, &id))
                .max(res(&scale(-1.0, &p)?, &inv(&p)?)))
        });
        rec.check(format!("spd.v2_scalar_distributive/{tag}"), || {
            Ok(res(&scale(s + t, &p)?, &add(&scale(s, &p)?, &scale(t, &p)?)?))
        });
        rec.check(format!("spd.v3_scalar_associative/{tag}"), || {
            Ok(res(&scale(s * t, &p)?, &scale(s, &scale(t, &p)?)?))
        });
        rec.check(format!("spd.v4_gyration_scaling/{tag}"), || {
            Ok(res(&gyr(&p, &q, &scale(t, &r)?)?, &scale(t, &gyr(&p, &q, &r)?)?))
        });
        rec.check(format!("spd.v5_collinear_gyration/{tag}"), || {
            Ok(res(&gyr(&scale(s, &p)?, &scale(t, &p)?, &r)?, &r))
        });
        rec.check(format!("spd.left_cancellation/{tag}"), || {
            Ok(res(&add(&inv(&p)?, &add(&p, &q)?)?, &q))
        });
        rec.check(format!("spd.transported_log/{tag}"), || {
            let v = spd_log(m, &id, &q)?.into_value();
            let moved = spd_exp(m, &spd_transport_identity(m, &p, &v)?)?;
            let direct = match m {
                SpdMetric::Ai => congruence(spd_sqrt(&p).as_mat(), q.as_mat()),
                _ => add(&p, &q)?.into_mat(),
            };
            Ok(rel_residual(moved.as_mat(), &direct))
        });
    }
    rec.check("spd.cholesky_square", || {
        let lhs = cholesky(&spd_add(SpdMetric::Lc, &p, &q)?)?;
        let rhs = lt_add(&cholesky(&p)?, &cholesky(&q)?)?;
        Ok(rel_residual(lhs.as_mat(), rhs.as_mat()))
    });
    Ok(())
}

fn spd_isometries(rng: &mut ChaCha8Rng, dim: Dim, rec: &mut Recorder) -> Result<()> {
    let n = dim.n;
    let (a, b) = (spd(rng, n, rec)?, spd(rng, n, rec)?);
    let (p, q, r) = (spd(rng, n, rec)?, spd(rng, n, rec)?, spd(rng, n, rec)?);
    for m in SpdMetric::ALL {
        let d = |x: &SpdMatrix, y: &SpdMatrix| spd_gyrodistance(m, x, y);
        let tag = m.tag();
        rec.check(format!("spd.left_translation_isometry/{tag}"), || {
            Ok(rel_residual_scalar(d(&spd_add(m, &a, &p)?, &spd_add(m, &a, &q)?)?, d(&p, &q)?))
        });
        rec.check(format!("spd.gyration_isometry/{tag}"), || {
            Ok(rel_residual_scalar(d(&spd_gyr(m, &a, &b, &p)?, &spd_gyr(m, &a, &b, &q)?)?, d(&p, &q)?))
        });
        rec.check(format!("spd.inverse_isometry/{tag}"), || {
            Ok(rel_residual_scalar(d(&spd_inverse(m, &p)?, &spd_inverse(m, &q)?)?, d(&p, &q)?))
        });
        if m.is_flat() {
            let laws = gyrotriangle_laws(m, &p, &q, &r);
            rec.check(format!("spd.gyrocosine_law/{tag}"), || {
                Ok(laws.clone()?.cosine_residuals.iter().copied().fold(0.0, f64::max))
            });
            rec.check(format!("spd.gyrosine_law/{tag}"), || Ok(laws?.sine_residual));
        }
    }
    Ok(())
}

fn spd_mlr(rng: &mut ChaCha8Rng, dim: Dim, rec: &mut Recorder) -> Result<()> {
    let n = dim.n;
    let base = spd(rng, n, rec)?;
    let normal = random_sym(rng, n);
    let x = spd(rng, n, rec)?;
    for m in SpdMetric::ALL {
        let h = Hypergyroplane::new(m, base.clone(), normal.clone())?;
        let tag = m.tag();
        if m.is_flat() {
            let formula = match m {
                SpdMetric::Le => dist_le(&h, &x),
                _ => dist_lc(&h, &x),
            };
            let numeric = plane_distance_numeric(&h, &x, PLANE_SAMPLES, rng);
            rec.check(format!("mlr.lower_bound/{tag}"), || {
                let (f, num) = (formula.clone()?, numeric.clone()?);
                Ok((f - 1e-9 - num.sampled_min.min(num.refined_min)).max(0.0))
            });
            rec.check(format!("mlr.refined_minimum/{tag}"), || {
                let (f, num) = (formula.clone()?, numeric?);
                Ok((num.refined_min - f).abs() / f)
            });
            let pseudo = pseudodist_numeric(&h, &x, DEFAULT_BUDGET, rng);
            rec.check(format!("mlr.pseudo_equals_true/{tag}"), || {
                let f = formula?;
                Ok((pseudo? - f).abs() / f)
            });
        } else {
            let pseudo = pseudodist_numeric(&h, &x, DEFAULT_BUDGET, rng);
            rec.check("mlr.ai_pseudodistance", || {
                let f = pseudodist_ai(&h, &x)?;
                Ok((pseudo? - f).abs() / f)
            });
        }
        let mut planes = vec![h];
        let mut blocks = vec![x.clone()];
        planes.push(Hypergyroplane::new(m, spd(rng, n, rec)?, random_sym(rng, n))?);
        blocks.push(spd(rng, n, rec)?);
        rec.check(format!("mlr.block_diagonal/{tag}"), || {
            let set = BlockDiagSet::new(blocks)?;
            Ok(rel_residual_scalar(blockdiag_dist(&planes, &set)?, blockdiag_dist_assembled(&planes, &set)?))
        });
    }
    let logits: Vec<f64> = (0..4).map(|_| 5.0 * rng.sample::<f64, _>(StandardNormal)).collect();
    let shift = uniform(rng, -50.0, 50.0);
    rec.check("mlr.softmax_normalized", || Ok((softmax(&logits).iter().sum::<f64>() - 1.0).abs()));
    rec.check("mlr.argmax_shift_invariant", || {
        let shifted: Vec<f64> = logits.iter().map(|l| l + shift).collect();
        Ok((argmax(&logits) != argmax(&shifted)) as u8 as f64)
    });
    Ok(())
}

fn gr_dims(dim: Dim) -> (usize, usize) {
    (dim.n, dim.p.expect("validated Grassmann dims"))
}

fn projector_residual(a: &Projector, b: &Projector) -> f64 {
    rel_residual(a.as_mat(), b.as_mat())
}

fn frame_residual(a: &OnbFrame, b: &OnbFrame) -> f64 {
    projector_residual(&tau(a), &tau(b))
}

fn gr_axioms(rng: &mut ChaCha8Rng, dim: Dim, rec: &mut Recorder) -> Result<()> {
    let (n, k) = gr_dims(dim);
    let u = gen_onb_within(rng, n, k, GR_RADIUS)?;
    let v = gen_onb_within(rng, n, k, GR_RADIUS)?;
    let w = gen_onb_within(rng, n, k, GR_RADIUS)?;
    let (p, q, r) = (tau(&u), tau(&v), tau(&w));
    let ip = Projector::identity(n, k)?;
    let iu = OnbFrame::identity(n, k)?;

    rec.check("gr.g1_left_identity/proj", || Ok(projector_residual(&gr_add(&ip, &p)?, &p)));
    rec.check("gr.g2_left_inverse/proj", || Ok(projector_residual(&gr_add(&gr_inverse(&p)?, &p)?, &ip)));
    rec.check("gr.g3_left_gyroassociative/proj", || {
        let lhs = gr_add(&p, &gr_add(&q, &r)?)?;
        let rhs = gr_add(&gr_add(&p, &q)?, &gr_gyr(&p, &q, &r)?)?;
        Ok(projector_residual(&lhs, &rhs))
    });
    rec.check("gr.g4_left_reduction/proj", || {
        Ok(projector_residual(&gr_gyr(&p, &q, &r)?, &gr_gyr(&gr_add(&p, &q)?, &q, &r)?))
    });
    rec.check("gr.gyrocommutative/proj", || {
        Ok(projector_residual(&gr_add(&p, &q)?, &gr_gyr(&p, &q, &gr_add(&q, &p)?)?))
    });

    rec.check("gr.g1_left_identity/onb", || Ok(frame_residual(&onb_add(&iu, &u)?, &u)));
    rec.check("gr.g2_left_inverse/onb", || Ok(frame_residual(&onb_add(&onb_inverse(&u)?, &u)?, &iu)));
    rec.check("gr.g3_left_gyroassociative/onb", || {
        let lhs = onb_add(&u, &onb_add(&v, &w)?)?;
        let rhs = onb_add(&onb_add(&u, &v)?, &onb_gyr(&u, &v, &w)?)?;
        Ok(frame_residual(&lhs, &rhs))
    });
    rec.check("gr.g4_left_reduction/onb", || {
        Ok(frame_residual(&onb_gyr(&u, &v, &w)?, &onb_gyr(&onb_add(&u, &v)?, &v, &w)?))
    });
    rec.check("gr.gyrocommutative/onb", || {
        Ok(frame_residual(&onb_add(&u, &v)?, &onb_gyr(&u, &v, &onb_add(&v, &u)?)?))
    });
    Ok(())
}

fn gr_isometries(rng: &mut ChaCha8Rng, dim: Dim, rec: &mut Recorder) -> Result<()> {
    let (n, k) = gr_dims(dim);
    let mut draw = || gen_onb_within(rng, n, k, GR_RADIUS).map(|u| tau(&u));
    let (a, b, p, q) = (draw()?, draw()?, draw()?, draw()?);
    let d = gr_gyrodistance;
    rec.check("gr.left_translation_isometry", || {
        Ok(rel_residual_scalar(d(&gr_add(&a, &p)?, &gr_add(&a, &q)?)?, d(&p, &q)?))
    });
    rec.check("gr.gyration_isometry", || {
        Ok(rel_residual_scalar(d(&gr_gyr(&a, &b, &p)?, &gr_gyr(&a, &b, &q)?)?, d(&p, &q)?))
    });
    rec.check("gr.gyration_norm", || {
        Ok(rel_residual_scalar(gr_norm(&gr_gyr(&a, &b, &p)?)?, gr_norm(&p)?))
    });
    rec.check("gr.inverse_isometry", || {
        Ok(rel_residual_scalar(d(&gr_inverse(&p)?, &gr_inverse(&q)?)?, d(&p, &q)?))
    });
    Ok(())
}

fn gr_onb_consistency(rng: &mut ChaCha8Rng, dim: Dim, rec: &mut Recorder) -> Result<()> {
    let (n, k) = gr_dims(dim);
    let u = gen_onb_within(rng, n, k, GR_RADIUS)?;
    let v = gen_onb_within(rng, n, k, GR_RADIUS)?;
    let w = gen_onb_within(rng, n, k, GR_RADIUS)?;
    let t = uniform(rng, -2.0, 2.0);
    let wide = gen_onb_within(rng, n, k, GR_WIDE_RADIUS)?;
    let g = gen_onb(rng, n, k)?;
    let o = nalgebra::QR::new(gaussian(rng, k, k)).q();

    rec.check("gr.tau_add", || {
        Ok(projector_residual(&tau(&onb_add(&u, &v)?), &gr_add(&tau(&u), &tau(&v))?))
    });
    rec.check("gr.tau_scale", || {
        Ok(projector_residual(&tau(&onb_scale(t, &u)?), &gr_scale(t, &tau(&u))?))
    });
    rec.check("gr.tau_gyr", || {
        Ok(projector_residual(&tau(&onb_gyr(&u, &v, &w)?), &gr_gyr(&tau(&u), &tau(&v), &tau(&w))?))
    });
    rec.check("gr.exp_log_roundtrip", || {
        let q = tau(&wide);
        Ok(projector_residual(&gr_exp_identity(&gr_log_identity(&q)?)?, &q))
    });
    rec.check("gr.pangle_basis_invariance", || principal_angle_distance(&g, &g.rotate(&o)?));
    Ok(())
}

/// Error of the central difference of `log` at step `h` against `Dlog_P[W]`.
fn fd_error(p: &SpdMatrix, w: &SymMatrix, exact: &Mat, h: f64) -> Result<f64> {
    let plus = SpdMatrix::new(p.as_mat() + w.as_mat() * h)?;
    let minus = SpdMatrix::new(p.as_mat() - w.as_mat() * h)?;
    let fd = (mat_log_spd(&plus).into_mat() - mat_log_spd(&minus).into_mat()) / (2.0 * h);
    Ok((fd - exact).norm())
}

fn kernels(rng: &mut ChaCha8Rng, dim: Dim, rec: &mut Recorder) -> Result<()> {
    let n = dim.n;
    let p = spd(rng, n, rec)?;
    let w = random_sym(rng, n);
    rec.check("kern.exp_log_roundtrip", || {
        Ok(rel_residual(&mat_exp(mat_log_spd(&p).as_mat())?, p.as_mat()))
    });
    rec.check("kern.cholesky_roundtrip", || {
        let l = cholesky(&p)?;
        Ok(rel_residual(&(l.as_mat() * l.as_mat().transpose()), p.as_mat()))
    });
    rec.check("kern.dlog_second_order", || {
        let exact = frechet_dlog(&p, &w)?.into_mat();
        let ratio = fd_error(&p, &w, &exact, 1e-3)? / fd_error(&p, &w, &exact, 5e-4)?;
        Ok((3.0 - ratio).max(ratio - 5.0).max(0.0))
    });
    rec.check("kern.dexp_dlog_identity", || {
        let back = frechet_dexp(&mat_log_spd(&p), &frechet_dlog(&p, &w)?)?;
        Ok(rel_residual(back.as_mat(), w.as_mat()))
    });
    Ok(())
}

/// Rank by sorting: position of the truth after ordering candidates by
/// descending score, truth placed after every tie.
fn sorted_rank(scores: &[f64], truth: usize) -> usize {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| {
        scores[b]
            .total_cmp(&scores[a])
            .then_with(|| (a == truth).cmp(&(b == truth)))
    });
    order.iter().position(|&i| i == truth).expect("truth is a candidate") + 1
}

fn kgc(rng: &mut ChaCha8Rng, dim: Dim, rec: &mut Recorder) -> Result<()> {
    let (n, k) = gr_dims(dim);
    let q = n - k;
    let small = |rng: &mut ChaCha8Rng| gaussian(rng, k, q) * 0.3;
    let (bs, bo) = (uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0));
    let s = EntityEmbedding::new(n, k, small(rng), bs)?;
    let o = EntityEmbedding::new(n, k, small(rng), bo)?;
    let a = Mat::from_fn(k, q, |_, _| uniform(rng, 0.5, 1.5));
    let r = RelationEmbedding::new(n, k, a.clone(), small(rng))?;
    let rot = nalgebra::QR::new(gaussian(rng, k, k)).q();

    rec.check("kgc.trivial_score", || {
        let zero = |b| EntityEmbedding::new(n, k, Mat::zeros(k, q), b);
        let rel = RelationEmbedding::new(n, k, Mat::from_element(k, q, 1.0), Mat::zeros(k, q))?;
        Ok((score(&zero(bs)?, &rel, &zero(bo)?)? - (bs + bo)).abs())
    });
    rec.check("kgc.object_rotation_invariance", || {
        let head = crate::kgc::compose(&s, &r)?;
        let obj = materialize(&o.b)?;
        let a = crate::kgc::score_frame(&head, &obj, bs, bo)?;
        let b = crate::kgc::score_frame(&head, &obj.rotate(&rot)?, bs, bo)?;
        Ok((a - b).abs())
    });
    rec.check("kgc.zero_relation_reduction", || {
        let rel = RelationEmbedding::new(n, k, a.clone(), Mat::zeros(k, q))?;
        let d = principal_angle_distance(&relation_apply(&a, &s.b)?, &materialize(&o.b)?)?;
        Ok(rel_residual_scalar(score(&s, &rel, &o)?, -d * d + bs + bo))
    });

    // Integer-valued scores force ties.
    let queries: Vec<(Vec<f64>, usize)> = (0..10)
        .map(|_| {
            let len = rng.random_range(1..=12);
            let sc: Vec<f64> = (0..len).map(|_| rng.random_range(-3..=3) as f64).collect();
            let t = rng.random_range(0..len);
            (sc, t)
        })
        .collect();
    let mut perm: Vec<usize> = (0..queries[0].0.len()).collect();
    perm.shuffle(rng);
    rec.check("kgc.rank_permutation_equivariance", || {
        let (sc, t) = &queries[0];
        let permuted: Vec<f64> = perm.iter().map(|&i| sc[i]).collect();
        let pt = perm.iter().position(|&i| i == *t).expect("permutation");
        Ok((pessimistic_rank(sc, *t) != pessimistic_rank(&permuted, pt)) as u8 as f64)
    });
    rec.check("kgc.rank_oracle", || {
        let scores: Vec<Vec<f64>> = queries.iter().map(|(s, _)| s.clone()).collect();
        let truth: Vec<usize> = queries.iter().map(|(_, t)| *t).collect();
        let got = rank_metrics(&scores, &truth)?;
        let ranks: Vec<usize> = queries.iter().map(|(s, t)| sorted_rank(s, *t)).collect();
        let nq = ranks.len() as f64;
        let mrr = ranks.iter().map(|&r| 1.0 / r as f64).sum::<f64>() / nq;
        let hits = |kk: usize| ranks.iter().filter(|&&r| r <= kk).count() as f64 / nq;
        let want = [mrr, hits(1), hits(3), hits(10)];
        let have = [got.mrr, got.hits1, got.hits3, got.hits10];
        Ok(want.iter().zip(&have).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    });
    Ok(())
}
