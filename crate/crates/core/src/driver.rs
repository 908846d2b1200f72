//! The pivot-partition-trim loop for exact and ε-approximate φ-quantiles.
//!
//! Each iteration picks a c-pivot of the current window, builds the
//! less-than and greater-than partitions from the original instance with two
//! stacked trims, and descends into the partition holding the target index.
//! Once the window has at most |D| answers it is materialized and sorted.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};

use crate::data::{Database, JoinQuery, ValueId};
use crate::error::{Error, Result};
use crate::exec::{count_answers, materialize_answers, Count};
use crate::instance::Instance;
use crate::par::{self, ExecMode};
use crate::pivot::{pow2_inverse, select_pivot};
use crate::plan::{classify_sum_tractability, Hypergraph};
use crate::predicate::{Direction, Predicate};
use crate::rank::{Aggregate, Bound, Ranking, RankingSpec, WeightValue};
use crate::ratio::{check_epsilon, check_phi, target_index, to_f64, Fraction};
use crate::trim::{trim, TrimMode};

#[derive(Clone, Debug)]
pub struct QuantileRequest {
    pub phi: Fraction,
    /// Zero selects exact mode.
    pub epsilon: Fraction,
    /// Use lossy SUM trims even when exact ones exist.
    pub force_lossy: bool,
    pub exec: ExecMode,
}

impl QuantileRequest {
    pub fn new(phi: Fraction) -> Self {
        QuantileRequest {
            phi,
            epsilon: Fraction::zero(),
            force_lossy: false,
            exec: ExecMode::default(),
        }
    }

    pub fn epsilon(mut self, eps: Fraction) -> Self {
        self.epsilon = eps;
        self
    }

    pub fn force_lossy(mut self, on: bool) -> Self {
        self.force_lossy = on;
        self
    }

    pub fn exec(mut self, exec: ExecMode) -> Self {
        self.exec = exec;
        self
    }
}

#[derive(Clone, Debug, Default, serde::Serialize)]
pub struct QuantileStats {
    pub iterations: usize,
    /// `⌈ℓ·log_{1/(1−c)} n⌉` with the smallest c met at runtime.
    pub iteration_bound: usize,
    pub lossy: bool,
    /// Per-trim error ε′ in approximate mode.
    pub trim_epsilon: Option<String>,
    /// Answers materialized at exit (0 when a pivot hit the target).
    pub materialized: usize,
}

#[derive(Clone, Debug)]
pub struct QuantileAnswer {
    /// Values aligned with the query's variables.
    pub answer: Vec<ValueId>,
    pub weight: WeightValue,
    /// `|Q(D)|`.
    pub total: Count,
    /// Zero-based target index `max(⌈φN⌉, 1) − 1`.
    pub target: Count,
    pub stats: QuantileStats,
}

pub fn quantile(q: &JoinQuery, d: &Database, spec: &RankingSpec, req: &QuantileRequest) -> Result<QuantileAnswer> {
    let inst = Instance::bind(q, d)?;
    let ranking = Ranking::bind(spec, q, d)?;
    quantile_instance(&inst, &ranking, req)
}

/// `⌈ℓ·log_{1/(1−c)} n⌉`, with `c = 2^-c_exp`.
pub fn iteration_bound(ell: usize, c_exp: u32, n: usize) -> usize {
    if n <= 1 {
        return 0;
    }
    let c = to_f64(&pow2_inverse(c_exp));
    let iters = ell as f64 * (n as f64).ln() / -(1.0 - c).ln();
    // slack for rounding in the logarithms
    (iters * (1.0 + 1e-9)).ceil() as usize
}

fn trim_mode(inst: &Instance, ranking: &Ranking, req: &QuantileRequest) -> Result<TrimMode> {
    if ranking.agg() != Aggregate::Sum {
        return Ok(TrimMode::Exact);
    }
    let uw = ranking.var_ids(inst);
    let verdict = classify_sum_tractability(&Hypergraph::of_instance(inst), &uw);
    let approx = !req.epsilon.is_zero();
    match (verdict.verdict.is_tractable() && !req.force_lossy, approx) {
        (true, _) => Ok(TrimMode::Exact),
        (false, true) => Ok(TrimMode::Lossy(req.epsilon)),
        (false, false) if verdict.verdict.is_tractable() => Err(Error::EpsilonOutOfRange(
            "lossy trims need a positive epsilon".into(),
        )),
        (false, false) => Err(Error::NotTractable(verdict.to_string())),
    }
}

pub fn quantile_instance(inst: &Instance, ranking: &Ranking, req: &QuantileRequest) -> Result<QuantileAnswer> {
    check_phi(&req.phi)?;
    check_epsilon(&req.epsilon)?;
    let mode = trim_mode(inst, ranking, req)?;
    let total = count_answers(inst)?;
    if total.is_zero() {
        return Err(Error::EmptyResult);
    }
    let target = target_index(&req.phi, &total);
    let ell = inst.atoms().len();
    let n = inst.size();
    // the tree with an artificial root has ℓ edges, so c = 2^-ℓ
    let c_exp = ell as u32;
    let mut stats = QuantileStats {
        iteration_bound: iteration_bound(ell, c_exp, n),
        ..QuantileStats::default()
    };
    let mode = match mode {
        TrimMode::Lossy(eps) => {
            let scale = (stats.iteration_bound.max(1) as u128) * 2;
            let eps_prime = Fraction::new(*eps.numer(), eps.denom() * scale);
            stats.lossy = true;
            stats.trim_epsilon = Some(eps_prime.to_string());
            TrimMode::Lossy(eps_prime)
        }
        m => m,
    };

    let agg = ranking.agg();
    let mut window = inst.clone();
    let mut count = total.clone();
    let mut k = target.clone();
    let mut low = Bound::NegInf;
    let mut high = Bound::PosInf;
    let mut max_c_exp = c_exp;
    let size = BigUint::from(n);

    while count > size {
        let pivot = select_pivot(&window, ranking)?;
        max_c_exp = max_c_exp.max(pivot.c_exponent);
        let wp = Bound::Finite(pivot.weight.clone());
        let stacked = |first: Direction, second: Direction, outer: &Bound| -> Result<Instance> {
            let p1 = Predicate::new(agg, first, wp.clone());
            let t1 = trim(inst, ranking, &p1, mode, req.exec)?;
            let p2 = Predicate::new(agg, second, outer.clone());
            Ok(trim(&t1.instance, ranking, &p2, mode, req.exec)?.instance)
        };
        let (lt, gt) = par::join(
            req.exec,
            || -> Result<(Instance, Count)> {
                let i = stacked(Direction::Lt, Direction::Gt, &low)?;
                let c = count_answers(&i)?;
                Ok((i, c))
            },
            || -> Result<(Instance, Count)> {
                let i = stacked(Direction::Gt, Direction::Lt, &high)?;
                let c = count_answers(&i)?;
                Ok((i, c))
            },
        );
        let (lt, lt_count) = lt?;
        let (gt, gt_count) = gt?;
        // lossy trims may drop answers; the loss lands in eq
        let below = &lt_count + &gt_count;
        let eq_count = if below > count { Count::zero() } else { &count - &below };
        stats.iterations += 1;

        let next_count = if k < lt_count {
            window = lt;
            high = wp;
            lt_count
        } else if k < &lt_count + &eq_count {
            stats.iteration_bound = iteration_bound(ell, max_c_exp, n);
            return Ok(QuantileAnswer {
                answer: pivot.answer[..inst.vars().len()].to_vec(),
                weight: pivot.weight,
                total,
                target,
                stats,
            });
        } else {
            k -= &lt_count + &eq_count;
            window = gt;
            low = wp;
            gt_count
        };
        if !stats.lossy {
            let c = pow2_inverse(pivot.c_exponent);
            let keep = Fraction::new(c.denom() - c.numer(), *c.denom());
            assert!(
                &next_count * BigUint::from(*keep.denom()) <= &count * BigUint::from(*keep.numer()),
                "pivot failed to shrink the window by a c-fraction"
            );
        }
        count = next_count;
        if count.is_zero() {
            return Err(Error::EmptyResult);
        }
        if k >= count {
            k = &count - 1u32;
        }
        stats.iteration_bound = iteration_bound(ell, max_c_exp, n);
        if !stats.lossy {
            assert!(
                stats.iterations <= stats.iteration_bound,
                "iteration budget exceeded"
            );
        }
    }

    let answers = materialize_answers(&window, None)?;
    let ids = ranking.var_ids(&window);
    let mut weighted: Vec<(WeightValue, Vec<ValueId>)> = answers
        .into_iter()
        .map(|a| Ok((ranking.weight_of_answer(&ids, &a)?, a)))
        .collect::<Result<_>>()?;
    weighted.sort_by(|a, b| a.0.cmp(&b.0));
    stats.materialized = weighted.len();
    let k = k.to_usize().expect("window fits in memory").min(weighted.len() - 1);
    let (weight, answer) = weighted.swap_remove(k);
    Ok(QuantileAnswer {
        answer: answer[..inst.vars().len()].to_vec(),
        weight,
        total,
        target,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{fig1, generate_instance, InstanceSpec, Shape};
    use crate::oracle::{oracle_quantile, oracle_ranked};

    #[test]
    fn fig1_quantiles_match_the_oracle() {
        let (q, d, full) = fig1();
        let vars = ["x1", "x2", "x3", "x4", "x5"];
        for agg in [Aggregate::Min, Aggregate::Max, Aggregate::Lex] {
            let spec = RankingSpec::new(agg, &vars);
            let r = Ranking::bind(&spec, &q, &d).unwrap();
            for i in 0..=10u128 {
                let phi = Fraction::new(i, 10);
                let got = quantile(&q, &d, &spec, &QuantileRequest::new(phi)).unwrap();
                let (_, w, _) = oracle_quantile(&q, &d, &r, &phi).unwrap();
                assert_eq!(got.weight, w, "{agg} phi = {phi}");
            }
        }
        // full SUM here is intractable, so only the approximate mode applies
        let r = Ranking::bind(&full, &q, &d).unwrap();
        let ranked = oracle_ranked(&q, &d, &r, None).unwrap();
        let req = QuantileRequest::new(Fraction::new(1, 2)).epsilon(Fraction::new(1, 10));
        let got = quantile(&q, &d, &full, &req).unwrap();
        let (less, equal) = ranked.rank_of(&got.weight).unwrap();
        assert!(less <= 6 && 6 < less + equal);
    }

    #[test]
    fn minimum_at_phi_zero() {
        let spec = InstanceSpec::new(Shape::Path(3), 40, 3).agg(Aggregate::Min).domain(8);
        let (q, d, rs) = generate_instance(&spec);
        let r = Ranking::bind(&rs, &q, &d).unwrap();
        let got = quantile(&q, &d, &rs, &QuantileRequest::new(Fraction::zero())).unwrap();
        let ranked = oracle_ranked(&q, &d, &r, None).unwrap();
        assert_eq!(got.weight, ranked.answers[0].1);
        assert!(got.stats.iterations > 0);
    }

    #[test]
    fn exact_sum_on_intractable_query_is_refused() {
        let spec = InstanceSpec::new(Shape::Product(3), 5, 1);
        let (q, d, rs) = generate_instance(&spec);
        let err = quantile(&q, &d, &rs, &QuantileRequest::new(Fraction::new(1, 2))).unwrap_err();
        assert!(matches!(err, Error::NotTractable(w) if w.contains("independent")));
    }

    #[test]
    fn bounds_use_the_runtime_constant() {
        assert_eq!(iteration_bound(3, 3, 1), 0);
        assert!(iteration_bound(3, 6, 100) > iteration_bound(3, 3, 100));
    }
}
