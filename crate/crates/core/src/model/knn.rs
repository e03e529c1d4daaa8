use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;
use std::sync::Mutex;

use crate::directives::{HposDirective, WsDirective};
use crate::error::{Error, Result};
use crate::features::{mismatches, FeatureVector, Projection};

use super::FormattingModel;

/// Vote weight of a neighbor at L0 distance `d`.
pub fn weight(d: f64) -> f64 {
    1.0 - d.cbrt()
}

/// Exemplars of one projection, collapsed into unique contexts.
struct Index<D> {
    width: usize,
    /// Position of the current-token-type slot within the projection.
    key_slot: usize,
    /// Unique projected vectors, `width` values each.
    contexts: Vec<u32>,
    /// Directive counts per unique context, sorted by directive.
    votes: Vec<Vec<(D, u32)>>,
    buckets: HashMap<u32, Vec<u32>>,
    frequency: HashMap<D, usize>,
    cache: Mutex<HashMap<Vec<u32>, D>>,
}

impl<D: Copy + Ord + Hash> Index<D> {
    fn build(projection: Projection, items: impl Iterator<Item = (Vec<u32>, D)>) -> Self {
        let slots = projection.slots();
        let key_slot = slots
            .iter()
            .position(|&s| s == 1)
            .expect("both projections include the current token type");
        let mut ids: HashMap<Vec<u32>, usize> = HashMap::new();
        let mut contexts = Vec::new();
        let mut counts: Vec<BTreeMap<D, u32>> = Vec::new();
        let mut buckets: HashMap<u32, Vec<u32>> = HashMap::new();
        let mut frequency = HashMap::new();
        for (v, d) in items {
            let next = counts.len();
            let id = *ids.entry(v.clone()).or_insert_with(|| {
                contexts.extend_from_slice(&v);
                counts.push(BTreeMap::new());
                buckets.entry(v[key_slot]).or_default().push(next as u32);
                next
            });
            *counts[id].entry(d).or_default() += 1;
            *frequency.entry(d).or_default() += 1;
        }
        Index {
            width: slots.len(),
            key_slot,
            contexts,
            votes: counts.into_iter().map(|c| c.into_iter().collect()).collect(),
            buckets,
            frequency,
            cache: Mutex::new(HashMap::new()),
        }
    }

    fn is_empty(&self) -> bool {
        self.votes.is_empty()
    }

    fn context(&self, c: usize) -> &[u32] {
        &self.contexts[c * self.width..(c + 1) * self.width]
    }

    fn multiplicity(&self, c: usize) -> usize {
        self.votes[c].iter().map(|(_, n)| *n as usize).sum()
    }

    /// `(mismatches, context)` for candidates within `max_mismatch`.
    fn scan(&self, v: &[u32], candidates: impl Iterator<Item = usize>, max_mismatch: usize) -> Vec<(usize, usize)> {
        candidates
            .filter_map(|c| {
                let m = mismatches(v, self.context(c));
                (m <= max_mismatch).then_some((m, c))
            })
            .collect()
    }

    fn predict(&self, v: &[u32], k: usize, threshold: f64) -> Option<D> {
        if self.is_empty() {
            return None;
        }
        if let Some(d) = self.cache.lock().expect("cache lock").get(v) {
            return Some(*d);
        }
        let d = self.predict_uncached(v, k, threshold);
        self.cache.lock().expect("cache lock").insert(v.to_vec(), d);
        Some(d)
    }

    fn predict_uncached(&self, v: &[u32], k: usize, threshold: f64) -> D {
        let width = self.width as f64;
        let max_mismatch = (0..=self.width)
            .take_while(|&m| m as f64 / width <= threshold)
            .last()
            .unwrap_or(0);

        let bucket = self.buckets.get(&v[self.key_slot]).map_or(&[][..], Vec::as_slice);
        let mut near = self.scan(v, bucket.iter().map(|&c| c as usize), max_mismatch);
        let found: usize = near.iter().map(|&(_, c)| self.multiplicity(c)).sum();
        if found < k {
            near = self.scan(v, 0..self.votes.len(), max_mismatch);
        }

        let mut scores: BTreeMap<D, f64> = BTreeMap::new();
        if near.is_empty() {
            // nothing within the threshold: the nearest contexts decide by count
            let all = self.scan(v, 0..self.votes.len(), self.width);
            let best = all.iter().map(|&(m, _)| m).min().unwrap_or(0);
            for &(_, c) in all.iter().filter(|&&(m, _)| m == best) {
                for &(d, n) in &self.votes[c] {
                    *scores.entry(d).or_default() += n as f64;
                }
            }
        } else {
            near.sort_unstable();
            let mut taken = 0;
            let mut level = None;
            for &(m, c) in &near {
                if taken >= k && level != Some(m) {
                    break;
                }
                level = Some(m);
                taken += self.multiplicity(c);
                let w = weight(m as f64 / width);
                for &(d, n) in &self.votes[c] {
                    *scores.entry(d).or_default() += n as f64 * w;
                }
            }
        }
        self.argmax(&scores)
    }

    fn argmax(&self, scores: &BTreeMap<D, f64>) -> D {
        let freq = |d: &D| self.frequency.get(d).copied().unwrap_or(0);
        let mut best: Option<(D, f64)> = None;
        // ascending directive order, so strict comparisons keep the smallest
        for (&d, &s) in scores {
            best = match best {
                None => Some((d, s)),
                Some((b, bs)) if s > bs || (s == bs && freq(&d) > freq(&b)) => Some((d, s)),
                keep => keep,
            };
        }
        best.expect("at least one candidate").0
    }
}

/// Read-only view of a model with search indexes and prediction caches.
/// Safe to share across threads.
pub struct Predictor<'m> {
    model: &'m FormattingModel,
    ws: Index<WsDirective>,
    hpos: Index<HposDirective>,
}

impl<'m> Predictor<'m> {
    pub fn new(model: &'m FormattingModel) -> Result<Self> {
        if model.exemplars.is_empty() {
            return Err(Error::EmptyModel);
        }
        model.validate()?;
        let ws = Index::build(
            Projection::Ws,
            model
                .exemplars
                .iter()
                .map(|e| (e.features.project(Projection::Ws), e.ws)),
        );
        let hpos = Index::build(
            Projection::Hpos,
            model
                .exemplars
                .iter()
                .filter_map(|e| Some((e.features.project(Projection::Hpos), e.hpos?))),
        );
        Ok(Predictor { model, ws, hpos })
    }

    pub fn model(&self) -> &'m FormattingModel {
        self.model
    }

    pub fn predict_ws(&self, v: &FeatureVector) -> WsDirective {
        self.ws
            .predict(&v.project(Projection::Ws), self.model.k, self.model.threshold)
            .expect("predictor models are never empty")
    }

    /// Falls back to aligning with the previous line when the model saw no
    /// line-starting tokens.
    pub fn predict_hpos(&self, v: &FeatureVector) -> HposDirective {
        self.hpos
            .predict(&v.project(Projection::Hpos), self.model.k, self.model.threshold)
            .unwrap_or(HposDirective::AlignPrevLine)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{ListStats, PairTable};
    use crate::features::{NUM_FEATURES, WS_SLOTS};
    use crate::model::{train, Exemplar};
    use crate::syntax::blocklang::Variant;
    use crate::syntax::VocabFingerprint;

    fn model(exemplars: Vec<Exemplar>, k: usize, threshold: f64) -> FormattingModel {
        FormattingModel {
            provider_id: "test".into(),
            vocabulary: VocabFingerprint {
                tokens: String::new(),
                rules: String::new(),
            },
            indent_size: 4,
            k,
            threshold,
            final_newline: false,
            pairs: PairTable::default(),
            list_stats: ListStats::default(),
            exemplars,
        }
    }

    fn ex(fill: u32, ws: WsDirective) -> Exemplar {
        Exemplar {
            features: FeatureVector([fill; NUM_FEATURES]),
            ws,
            hpos: None,
            starts_line: false,
            source: (0, 0),
        }
    }

    const SP: WsDirective = WsDirective::Space { n: 1 };
    const NL: WsDirective = WsDirective::Newline { n: 1 };

    #[test]
    fn weight_arithmetic() {
        assert_eq!(weight(0.0), 1.0);
        assert_eq!(weight(1.0), 0.0);
        assert_eq!(weight(0.125), 0.5);
    }

    #[test]
    fn exact_match_outvotes_ten_distant_exemplars() {
        let mut exs = vec![ex(1, SP)];
        exs.extend((0..10).map(|_| ex(2, NL)));
        let m = model(exs, 11, 1.0);
        let p = Predictor::new(&m).unwrap();
        assert_eq!(p.predict_ws(&FeatureVector([1; NUM_FEATURES])), SP);
    }

    #[test]
    fn unanimous_neighbors() {
        let m = model((0..5).map(|_| ex(3, NL)).collect(), 11, 0.15);
        let p = Predictor::new(&m).unwrap();
        assert_eq!(p.predict_ws(&FeatureVector([3; NUM_FEATURES])), NL);
    }

    #[test]
    fn far_query_falls_back_to_nearest() {
        let mut near = ex(1, NL);
        // share three ws slots with the query
        for &s in &WS_SLOTS[..3] {
            near.features.0[s] = 9;
        }
        let m = model(vec![ex(1, SP), ex(1, SP), near], 11, 0.15);
        let p = Predictor::new(&m).unwrap();
        assert_eq!(p.predict_ws(&FeatureVector([9; NUM_FEATURES])), NL);
    }

    #[test]
    fn weighted_vote_beats_raw_count() {
        // two exact matches for SP against three one-slot-off NL neighbors:
        // 2 * 1 = 2 versus 3 * (1 - cbrt(1/11)) ~= 1.65
        let mut exs = vec![ex(1, SP), ex(1, SP)];
        for _ in 0..3 {
            let mut e = ex(1, NL);
            e.features.0[0] = 7;
            exs.push(e);
        }
        let m = model(exs, 11, 0.15);
        let p = Predictor::new(&m).unwrap();
        assert_eq!(p.predict_ws(&FeatureVector([1; NUM_FEATURES])), SP);
    }

    #[test]
    fn k_cut_keeps_ties_at_the_last_rank() {
        // k = 1: the single exact match wins even though four one-off
        // neighbors would outvote it
        let mut exs = vec![ex(1, SP)];
        for _ in 0..4 {
            let mut e = ex(1, NL);
            e.features.0[0] = 7;
            exs.push(e);
        }
        let m = model(exs.clone(), 1, 0.15);
        assert_eq!(Predictor::new(&m).unwrap().predict_ws(&FeatureVector([1; NUM_FEATURES])), SP);
        let m = model(exs, 5, 0.15);
        assert_eq!(Predictor::new(&m).unwrap().predict_ws(&FeatureVector([1; NUM_FEATURES])), NL);
    }

    #[test]
    fn tie_goes_to_more_frequent_then_smaller_directive() {
        let m = model(vec![ex(1, SP), ex(1, NL), ex(5, NL)], 11, 0.15);
        let p = Predictor::new(&m).unwrap();
        assert_eq!(p.predict_ws(&FeatureVector([1; NUM_FEATURES])), NL);
        let m = model(vec![ex(1, SP), ex(1, NL)], 11, 0.15);
        let p = Predictor::new(&m).unwrap();
        assert_eq!(p.predict_ws(&FeatureVector([1; NUM_FEATURES])), NL.min(SP));
    }

    #[test]
    fn hpos_without_line_starts_aligns_with_previous_line() {
        let m = model(vec![ex(1, SP)], 11, 0.15);
        let p = Predictor::new(&m).unwrap();
        assert_eq!(
            p.predict_hpos(&FeatureVector([1; NUM_FEATURES])),
            HposDirective::AlignPrevLine
        );
    }

    #[test]
    fn empty_model_is_an_error() {
        let m = model(vec![], 11, 0.15);
        assert!(matches!(Predictor::new(&m), Err(Error::EmptyModel)));
    }

    #[test]
    fn unique_contexts_predict_their_own_directive() {
        let (lang, docs) = crate::model::tests::sample_docs(Variant::A);
        let m = train(&docs, &lang, 4).unwrap();
        let p = Predictor::new(&m).unwrap();
        let mut by_ctx: HashMap<Vec<u32>, Vec<WsDirective>> = HashMap::new();
        for e in &m.exemplars {
            by_ctx.entry(e.features.project(Projection::Ws)).or_default().push(e.ws);
        }
        for e in &m.exemplars {
            let seen = &by_ctx[&e.features.project(Projection::Ws)];
            if seen.iter().all(|d| *d == e.ws) {
                assert_eq!(p.predict_ws(&e.features), e.ws);
            }
        }
    }
}
