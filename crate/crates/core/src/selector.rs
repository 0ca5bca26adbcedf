//! Antenna selection strategies.
//!
//! - exhaustive TRA: worst-case threshold-region MSE minimised over the
//!   aligned candidate set
//! - greedy TRA: drop one antenna per round from the full array, keeping
//!   the removal with the smallest worst-case TRA
//! - PSL-constrained CRLB: smallest CRLB among candidates whose peak
//!   sidelobe level at the prior direction stays below a threshold
//! - ULA: the contiguous half-wavelength comb
//!
//! Metric evaluation goes through [`TraEvaluator`], which tabulates
//! `exp(i pi k d (u_j - u_a))` for every antenna index `k`, grid point `u_j`
//! and anchor `u_a` once per query so that each candidate pattern is a sum
//! of table entries.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;

use crate::beam::{
    crlb_from_diversity, grid_point, profile_from_samples, psl, tra_from_profile, AnchorSet,
    BeampatternProfile, TraOptions, MIN_GRID_POINTS,
};
use crate::error::{Error, Result};
use crate::layout::{
    align_layout, greedy_evaluation_count, positions_from_selection, unique_subarray_set,
    ArrayGeometry, SelectionVector,
};
use crate::signal::diversity;

pub const DEFAULT_EXHAUSTIVE_CAP: usize = 50_000;
pub const DEFAULT_BESSEL_MULTIPLICATIONS: u64 = 30;

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionQuery {
    pub anchors: AnchorSet,
    /// Aggregate SNR, linear.
    pub snr: f64,
    pub geometry: ArrayGeometry,
    pub m_target: usize,
    pub n_grid: usize,
}

impl SelectionQuery {
    pub fn new(
        anchors: AnchorSet,
        snr: f64,
        geometry: ArrayGeometry,
        m_target: usize,
        n_grid: usize,
    ) -> Result<Self> {
        let q = Self { anchors, snr, geometry, m_target, n_grid };
        q.validate()?;
        Ok(q)
    }

    fn validate(&self) -> Result<()> {
        let n = self.geometry.n_antennas();
        if self.m_target < 2 || self.m_target > n {
            return Err(Error::invalid(format!("M must be in 2..={n}, got {}", self.m_target)));
        }
        if !(self.snr > 0.0) || !self.snr.is_finite() {
            return Err(Error::invalid(format!("SNR must be positive, got {}", self.snr)));
        }
        if self.n_grid < MIN_GRID_POINTS {
            return Err(Error::invalid(format!("grid needs at least {MIN_GRID_POINTS} points")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    pub chosen: SelectionVector,
    /// Worst-case TRA for the TRA methods, CRLB for PSL-C.
    pub objective: f64,
    pub evaluations: u64,
    pub mult_count: u64,
    /// PSL-C only: no candidate met the constraint and the minimum-PSL
    /// candidate was returned instead.
    pub infeasible_fallback: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectorConfig {
    pub exhaustive_cap: usize,
    /// Multiplications charged per Bessel evaluation in the TRA count.
    pub bessel_multiplications: u64,
    pub tra: TraOptions,
}

impl Default for SelectorConfig {
    fn default() -> Self {
        Self {
            exhaustive_cap: DEFAULT_EXHAUSTIVE_CAP,
            bessel_multiplications: DEFAULT_BESSEL_MULTIPLICATIONS,
            tra: TraOptions::default(),
        }
    }
}

/// Per-query tables for fast beampattern sampling of index-set layouts.
pub struct TraEvaluator {
    n: usize,
    n_grid: usize,
    spacing: f64,
    snr: f64,
    anchors: Vec<f64>,
    // anchors.len() blocks of n_grid rows of n entries
    powers: Vec<Complex64>,
    opts: TraOptions,
    delta_b: u64,
    multiplications: u64,
    samples: Vec<f64>,
    indices: Vec<usize>,
}

/// Outcome of a bounded worst-case evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bounded {
    Value(f64),
    /// Some anchor already exceeded the bound; the exact value is unknown.
    Exceeds,
}

impl TraEvaluator {
    pub fn new(query: &SelectionQuery, config: &SelectorConfig) -> Result<Self> {
        query.validate()?;
        let n = query.geometry.n_antennas();
        let n_grid = query.n_grid;
        let spacing = query.geometry.spacing();
        let anchors = query.anchors.anchors().to_vec();
        let mut powers = Vec::with_capacity(anchors.len() * n_grid * n);
        for &u0 in &anchors {
            for j in 0..n_grid {
                let w = Complex64::from_polar(1.0, PI * spacing * (grid_point(j, n_grid) - u0));
                let mut z = Complex64::new(1.0, 0.0);
                for _ in 0..n {
                    powers.push(z);
                    z *= w;
                }
            }
        }
        Ok(Self {
            n,
            n_grid,
            spacing,
            snr: query.snr,
            anchors,
            powers,
            opts: config.tra,
            delta_b: config.bessel_multiplications,
            multiplications: 0,
            samples: vec![0.0; n_grid],
            indices: Vec::with_capacity(n),
        })
    }

    pub fn anchors(&self) -> &[f64] {
        &self.anchors
    }

    /// Multiplications charged so far, per the TRA cost model.
    pub fn multiplications(&self) -> u64 {
        self.multiplications
    }

    pub fn crlb(&self, b: &SelectionVector) -> Result<f64> {
        let pos: Vec<f64> = b.indices().map(|i| i as f64 * self.spacing).collect();
        let sub = crate::layout::Subarray::new(pos)?;
        crlb_from_diversity(self.snr, diversity(&sub))
    }

    /// Sidelobe profile of `b` at anchor `anchor`.
    pub fn profile(&mut self, anchor: usize, b: &SelectionVector) -> BeampatternProfile {
        self.indices.clear();
        self.indices.extend(b.indices());
        let block = &self.powers[anchor * self.n_grid * self.n..(anchor + 1) * self.n_grid * self.n];
        for (j, out) in self.samples.iter_mut().enumerate() {
            let row = &block[j * self.n..(j + 1) * self.n];
            let mut acc = Complex64::new(0.0, 0.0);
            for &k in &self.indices {
                acc += row[k];
            }
            *out = acc.norm_sqr();
        }
        let u0 = self.anchors[anchor];
        let positions: Vec<f64> = self.indices.iter().map(|&k| k as f64 * self.spacing).collect();
        profile_from_samples(u0, &self.samples, positions.len(), |u| {
            crate::beam::pattern_value(&positions, u - u0)
        })
    }

    /// TRA of `b` at one anchor.
    pub fn tra(&mut self, anchor: usize, b: &SelectionVector, crlb: f64) -> f64 {
        let profile = self.profile(anchor, b);
        let n = self.n as u64;
        self.multiplications += 2 * n * self.n_grid as u64
            + n
            + profile.count() as u64 * (2 * n + 2 + self.delta_b);
        tra_from_profile(&profile, self.snr, crlb, self.opts)
    }

    pub fn worst_case(&mut self, b: &SelectionVector) -> Result<f64> {
        match self.worst_case_bounded(b, f64::INFINITY)? {
            Bounded::Value(v) => Ok(v),
            Bounded::Exceeds => unreachable!("infinite bound"),
        }
    }

    /// Worst case over anchors, abandoning the candidate as soon as one
    /// anchor exceeds `bound`.
    pub fn worst_case_bounded(&mut self, b: &SelectionVector, bound: f64) -> Result<Bounded> {
        if b.len() != self.n {
            return Err(Error::LengthMismatch { expected: self.n, found: b.len() });
        }
        let crlb = self.crlb(b)?;
        let mut worst = f64::NEG_INFINITY;
        for a in 0..self.anchors.len() {
            worst = worst.max(self.tra(a, b, crlb));
            if worst > bound {
                return Ok(Bounded::Exceeds);
            }
        }
        Ok(Bounded::Value(worst))
    }
}

type Pool = Arc<Vec<SelectionVector>>;

/// Selection front end holding configuration and a cache of aligned
/// candidate sets keyed by `(N, M)`.
#[derive(Default)]
pub struct Selector {
    config: SelectorConfig,
    pools: Mutex<HashMap<(usize, usize), Pool>>,
}

impl Selector {
    pub fn new(config: SelectorConfig) -> Self {
        Self { config, pools: Mutex::new(HashMap::new()) }
    }

    pub fn config(&self) -> &SelectorConfig {
        &self.config
    }

    /// Aligned candidate set for `(N, M)`, computed once.
    pub fn unique_set(&self, n: usize, m: usize) -> Result<Arc<Vec<SelectionVector>>> {
        if let Some(set) = self.pools.lock().expect("pool lock").get(&(n, m)) {
            return Ok(Arc::clone(set));
        }
        let (set, _) = unique_subarray_set(n, m)?;
        let set = Arc::new(set);
        self.pools.lock().expect("pool lock").insert((n, m), Arc::clone(&set));
        Ok(set)
    }

    pub fn exhaustive_tra(&self, q: &SelectionQuery) -> Result<SelectionResult> {
        q.validate()?;
        let n = q.geometry.n_antennas();
        let mut eval = TraEvaluator::new(q, &self.config)?;
        if q.m_target == n {
            let full = SelectionVector::full(n)?;
            let objective = eval.worst_case(&full)?;
            return Ok(SelectionResult {
                chosen: full,
                objective,
                evaluations: 1,
                mult_count: eval.multiplications(),
                infeasible_fallback: false,
            });
        }
        let pool = self.unique_set(n, q.m_target)?;
        if pool.len() > self.config.exhaustive_cap {
            return Err(Error::BudgetExceeded { count: pool.len(), cap: self.config.exhaustive_cap });
        }
        let mut best: Option<(SelectionVector, f64)> = None;
        for cand in pool.iter() {
            let bound = best.map_or(f64::INFINITY, |(_, v)| v);
            // ascending order: only a strictly smaller value replaces
            if let Bounded::Value(v) = eval.worst_case_bounded(cand, bound)? {
                if v < bound {
                    best = Some((*cand, v));
                }
            }
        }
        let (chosen, objective) = best.expect("candidate set is non-empty");
        Ok(SelectionResult {
            chosen,
            objective,
            evaluations: pool.len() as u64,
            mult_count: eval.multiplications(),
            infeasible_fallback: false,
        })
    }

    pub fn greedy_tra(&self, q: &SelectionQuery) -> Result<SelectionResult> {
        Ok(self.greedy_tra_path(q)?.pop().expect("at least one round"))
    }

    /// Greedy removal, returning the result after every round (popcount
    /// `N-1` down to `M`). Each entry's counters are cumulative.
    pub fn greedy_tra_path(&self, q: &SelectionQuery) -> Result<Vec<SelectionResult>> {
        q.validate()?;
        let n = q.geometry.n_antennas();
        if q.m_target >= n {
            return Err(Error::invalid("greedy selection needs M < N"));
        }
        let mut eval = TraEvaluator::new(q, &self.config)?;
        let mut memo: HashMap<SelectionVector, f64> = HashMap::new();
        let mut current = SelectionVector::full(n)?;
        let mut evaluations = 0u64;
        let mut path = Vec::with_capacity(n - q.m_target);
        while current.popcount() > q.m_target {
            let mut best: Option<(SelectionVector, f64)> = None;
            for i in current.indices() {
                let cand = current.with_cleared(i)?;
                evaluations += 1;
                let key = align_layout(&cand);
                let bound = best.map_or(f64::INFINITY, |(_, v)| v);
                let value = match memo.get(&key) {
                    Some(&v) => Some(v),
                    None => match eval.worst_case_bounded(&key, bound)? {
                        Bounded::Value(v) => {
                            memo.insert(key, v);
                            Some(v)
                        }
                        Bounded::Exceeds => None,
                    },
                };
                if let Some(v) = value {
                    let better = match best {
                        None => true,
                        Some((b, bv)) => v < bv || (v == bv && cand < b),
                    };
                    if better {
                        best = Some((cand, v));
                    }
                }
            }
            let (chosen, objective) = best.expect("at least one removal candidate");
            current = chosen;
            path.push(SelectionResult {
                chosen,
                objective,
                evaluations,
                mult_count: eval.multiplications(),
                infeasible_fallback: false,
            });
        }
        debug_assert_eq!(evaluations, greedy_evaluation_count(n, q.m_target));
        Ok(path)
    }

    /// Minimum-CRLB candidate subject to `PSL(u0) <= delta`, with `u0` the
    /// first anchor.
    pub fn psl_c(&self, q: &SelectionQuery, delta: f64) -> Result<SelectionResult> {
        q.validate()?;
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::invalid(format!("PSL threshold must be in [0, 1], got {delta}")));
        }
        let n = q.geometry.n_antennas();
        let m = q.m_target;
        let pool = if m == n { Arc::new(vec![SelectionVector::full(n)?]) } else { self.unique_set(n, m)? };
        // PSL never exceeds 1, so delta = 1 needs no pattern evaluation
        let constrained = delta < 1.0;
        let single = AnchorSet::new(vec![q.anchors.anchors()[0]])?;
        let q0 = SelectionQuery { anchors: single, ..q.clone() };
        let mut eval = if constrained { Some(TraEvaluator::new(&q0, &self.config)?) } else { None };

        let mut best: Option<(SelectionVector, f64)> = None;
        let mut lowest_psl: Option<(SelectionVector, f64)> = None;
        let mut feasible = 0u64;
        for cand in pool.iter() {
            if let Some(eval) = eval.as_mut() {
                let level = psl(&eval.profile(0, cand));
                if lowest_psl.is_none_or(|(_, l)| level < l) {
                    lowest_psl = Some((*cand, level));
                }
                if level > delta {
                    continue;
                }
            }
            feasible += 1;
            let u = candidate_diversity(cand, q.geometry.spacing());
            if best.is_none_or(|(_, bu)| u > bu) {
                best = Some((*cand, u));
            }
        }
        let (chosen, infeasible_fallback) = match best {
            Some((b, _)) => (b, false),
            None => (lowest_psl.expect("non-empty candidate set").0, true),
        };
        let objective = crlb_from_diversity(q.snr, candidate_diversity(&chosen, q.geometry.spacing()))?;
        let f = binomial(n, m);
        Ok(SelectionResult {
            chosen,
            objective,
            evaluations: pool.len() as u64,
            mult_count: multiplication_count(&CountMethod::PslC { n, m, total: f, feasible }),
            infeasible_fallback,
        })
    }
}

fn candidate_diversity(b: &SelectionVector, spacing: f64) -> f64 {
    let pos: Vec<f64> = b.indices().map(|i| i as f64 * spacing).collect();
    let m = pos.len() as f64;
    let mean = pos.iter().sum::<f64>() / m;
    pos.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / m
}

pub fn select_exhaustive_tra(q: &SelectionQuery) -> Result<SelectionResult> {
    Selector::default().exhaustive_tra(q)
}

pub fn select_greedy_tra(q: &SelectionQuery) -> Result<SelectionResult> {
    Selector::default().greedy_tra(q)
}

pub fn select_psl_c(q: &SelectionQuery, delta: f64) -> Result<SelectionResult> {
    Selector::default().psl_c(q, delta)
}

/// Every `k`-th antenna from index 0, `k = round(1 / spacing)`, so the
/// chosen positions are `0, 1, ..., M-1` half-wavelengths. Spacings above
/// half a wavelength fall back to contiguous antennas.
pub fn select_ula(g: &ArrayGeometry, m: usize) -> Result<SelectionVector> {
    let n = g.n_antennas();
    if m == 0 || m > n {
        return Err(Error::invalid(format!("M must be in 1..={n}, got {m}")));
    }
    let stride = if g.spacing() <= 0.5 { (1.0 / g.spacing()).round() as usize } else { 1 };
    let stride = stride.max(1);
    if (m - 1) * stride >= n {
        return Err(Error::invalid(format!(
            "a {m}-element half-wavelength comb needs {} antennas, array has {n}",
            (m - 1) * stride + 1
        )));
    }
    let idx: Vec<usize> = (0..m).map(|i| i * stride).collect();
    SelectionVector::from_indices(n, &idx)
}

/// Inputs of the Table II style multiplication counts.
#[derive(Debug, Clone, PartialEq)]
pub enum CountMethod {
    /// `6N + M F + 4 M F_feasible`.
    PslC { n: usize, m: usize, total: u64, feasible: u64 },
    /// `G (2 N N_R + N + K (2N + 2 + delta_B))`.
    TraG { evaluations: u64, n: usize, n_grid: usize, sidelobes: u64, bessel: u64 },
    /// `sum_h g_{h-1} g_h` over the full layer dimension list, input and
    /// output included.
    TraDl { layer_dims: Vec<usize> },
}

pub fn multiplication_count(method: &CountMethod) -> u64 {
    match *method {
        CountMethod::PslC { n, m, total, feasible } => {
            6 * n as u64 + m as u64 * total + 4 * m as u64 * feasible
        }
        CountMethod::TraG { evaluations, n, n_grid, sidelobes, bessel } => {
            let n = n as u64;
            evaluations * (2 * n * n_grid as u64 + n + sidelobes * (2 * n + 2 + bessel))
        }
        CountMethod::TraDl { ref layer_dims } => {
            layer_dims.windows(2).map(|w| (w[0] * w[1]) as u64).sum()
        }
    }
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u64, |acc, i| acc * (n - i) as u64 / (i + 1) as u64)
}

/// Positions of `b` in half-wavelengths, for reporting.
pub fn chosen_positions(b: &SelectionVector, g: &ArrayGeometry) -> Result<Vec<f64>> {
    Ok(positions_from_selection(b, g)?.positions().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::beam::{anchor_set, sidelobe_profile, worst_case_tra};
    use crate::layout::Subarray;

    fn query(n: usize, d: f64, m: usize, u_hat: f64, n_a: usize, snr: f64) -> SelectionQuery {
        SelectionQuery::new(
            anchor_set(u_hat, 0.1, n_a).unwrap(),
            snr,
            ArrayGeometry::new(n, d).unwrap(),
            m,
            2048,
        )
        .unwrap()
    }

    fn positions(b: &SelectionVector, d: f64) -> Vec<f64> {
        b.indices().map(|i| i as f64 * d).collect()
    }

    #[test]
    fn evaluator_matches_direct_metrics() {
        let q = query(21, 0.5, 6, 0.2, 5, 10.0);
        let mut eval = TraEvaluator::new(&q, &SelectorConfig::default()).unwrap();
        let b = SelectionVector::from_indices(21, &[0, 1, 2, 18, 19, 20]).unwrap();
        let sub = Subarray::new(positions(&b, 0.5)).unwrap();
        for (a, &u0) in q.anchors.anchors().iter().enumerate() {
            let fast = eval.profile(a, &b);
            let slow = sidelobe_profile(&sub, u0, 2048).unwrap();
            assert_eq!(fast.count(), slow.count());
            for (x, y) in fast.sidelobes.iter().zip(&slow.sidelobes) {
                assert!((x.location - y.location).abs() < 1e-9);
                assert!((x.value - y.value).abs() < 1e-9);
            }
        }
        let direct = worst_case_tra(&q.anchors, 10.0, &sub, 2048).unwrap();
        let fast = eval.worst_case(&b).unwrap();
        assert!((direct - fast).abs() < 1e-9 * direct);
    }

    #[test]
    fn exhaustive_small_case_counts() {
        let q = query(11, 0.5, 2, 0.2, 1, 10.0);
        let r = select_exhaustive_tra(&q).unwrap();
        assert_eq!(r.evaluations, 10);
        assert_eq!(r.chosen.popcount(), 2);

        let q = query(6, 0.5, 6, 0.0, 1, 10.0);
        let r = select_exhaustive_tra(&q).unwrap();
        assert_eq!(r.chosen, SelectionVector::full(6).unwrap());
        assert_eq!(r.evaluations, 1);
    }

    #[test]
    fn exhaustive_is_minimal_over_candidates() {
        let q = query(11, 0.5, 4, 0.2, 5, 10.0);
        let r = select_exhaustive_tra(&q).unwrap();
        assert_eq!(r.evaluations, 70);
        let (set, _) = unique_subarray_set(11, 4).unwrap();
        for cand in &set {
            let sub = Subarray::new(positions(cand, 0.5)).unwrap();
            let v = worst_case_tra(&q.anchors, 10.0, &sub, 2048).unwrap();
            assert!(r.objective <= v * (1.0 + 1e-9), "{cand} has {v} < {}", r.objective);
        }
    }

    #[test]
    fn exhaustive_respects_cap() {
        let sel = Selector::new(SelectorConfig { exhaustive_cap: 5, ..Default::default() });
        let q = query(11, 0.5, 4, 0.2, 1, 10.0);
        assert!(matches!(sel.exhaustive_tra(&q), Err(Error::BudgetExceeded { count: 70, cap: 5 })));
    }

    #[test]
    fn greedy_counts_and_nesting() {
        let q = query(11, 0.5, 6, -0.3, 1, 10.0);
        let path = Selector::default().greedy_tra_path(&q).unwrap();
        assert_eq!(path.last().unwrap().evaluations, 45);
        for w in path.windows(2) {
            assert!(w[1].chosen.is_subset_of(&w[0].chosen));
            assert_eq!(w[1].chosen.popcount() + 1, w[0].chosen.popcount());
        }
        assert!(path.last().unwrap().mult_count > 0);
    }

    #[test]
    fn greedy_close_to_exhaustive() {
        let q = query(11, 0.5, 4, 0.2, 5, 10.0);
        let g = select_greedy_tra(&q).unwrap();
        let e = select_exhaustive_tra(&q).unwrap();
        assert_eq!(g.evaluations, 56);
        assert!(g.objective <= e.objective * 1.25, "{} vs {}", g.objective, e.objective);
        assert_eq!(g, select_greedy_tra(&q).unwrap());
    }

    #[test]
    fn greedy_rejects_full_target() {
        let q = query(6, 0.5, 6, 0.0, 1, 10.0);
        assert!(select_greedy_tra(&q).is_err());
    }

    #[test]
    fn psl_c_unconstrained_maximises_diversity() {
        let q = query(11, 0.5, 4, 0.2, 1, 10.0);
        let r = select_psl_c(&q, 1.0).unwrap();
        let best_u = candidate_diversity(&r.chosen, 0.5);
        for cand in unique_subarray_set(11, 4).unwrap().0 {
            assert!(candidate_diversity(&cand, 0.5) <= best_u);
        }
        assert!(!r.infeasible_fallback);
        assert_eq!(r.mult_count, 6 * 11 + 4 * 330 + 16 * 70);
    }

    #[test]
    fn psl_c_constraint_and_fallback() {
        let q = query(11, 0.5, 4, 0.2, 1, 10.0);
        let r = select_psl_c(&q, 0.5).unwrap();
        let sub = Subarray::new(positions(&r.chosen, 0.5)).unwrap();
        assert!(psl(&sidelobe_profile(&sub, 0.2, 2048).unwrap()) <= 0.5 + 1e-9);

        // a compact quarter-wavelength layout has no sidelobe inside the
        // visible region, so even delta = 0 is feasible here
        let r = select_psl_c(&q, 0.0).unwrap();
        assert!(!r.infeasible_fallback);
        assert!(select_psl_c(&q, 1.5).is_err());

        let wide = query(21, 0.5, 6, 0.2, 1, 10.0);
        let r = select_psl_c(&wide, 0.0).unwrap();
        assert!(r.infeasible_fallback);
        assert_eq!(r.chosen.popcount(), 6);
    }

    #[test]
    fn ula_examples() {
        let g = ArrayGeometry::new(21, 0.5).unwrap();
        let b = select_ula(&g, 6).unwrap();
        assert_eq!(b.indices().collect::<Vec<_>>(), vec![0, 2, 4, 6, 8, 10]);
        assert_eq!(chosen_positions(&b, &g).unwrap(), vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0]);
        assert_eq!(chosen_positions(&select_ula(&g, 4).unwrap(), &g).unwrap(), vec![0.0, 1.0, 2.0, 3.0]);

        let g1 = ArrayGeometry::new(5, 1.0).unwrap();
        assert_eq!(select_ula(&g1, 3).unwrap().indices().collect::<Vec<_>>(), vec![0, 1, 2]);
        assert!(select_ula(&ArrayGeometry::new(9, 0.5).unwrap(), 6).is_err());
    }

    #[test]
    fn multiplication_count_examples() {
        let dl = CountMethod::TraDl { layer_dims: vec![2, 16, 32, 64, 32, 16, 21] };
        assert_eq!(multiplication_count(&dl), 5488);
        let g0 = CountMethod::TraG { evaluations: 0, n: 21, n_grid: 2048, sidelobes: 4, bessel: 30 };
        assert_eq!(multiplication_count(&g0), 0);
        let g = CountMethod::TraG { evaluations: 210, n: 21, n_grid: 2048, sidelobes: 0, bessel: 30 };
        assert_eq!(multiplication_count(&g), 210 * (2 * 21 * 2048 + 21));
        let p = CountMethod::PslC { n: 21, m: 6, total: 54264, feasible: 1000 };
        assert_eq!(multiplication_count(&p), 349_710);
        assert_eq!(binomial(21, 8), 203_490);
    }
}
