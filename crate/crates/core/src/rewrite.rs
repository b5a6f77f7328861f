//! Degree-truncated two-sided completion and normal forms.
//!
//! Relations are oriented by their deglex-leading word into rules
//! `lead -> rest`. Overlaps between leads are resolved in ascending degree
//! (then lexicographic) order up to the presentation's bound, which makes the
//! result exact for every polynomial whose reduction only needs rules of
//! degree at most the bound.

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::field::Field;
use crate::freealg::{NcPoly, Presentation, Word};

/// `lead - rest` lies in the ideal; every word of `rest` is below `lead`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RewriteRule {
    pub lead: Word,
    pub rest: NcPoly,
}

impl RewriteRule {
    pub fn as_poly(&self, field: Field) -> NcPoly {
        let mut p = -&self.rest;
        p.add_term(self.lead.clone(), field.one());
        p
    }
}

#[derive(Clone, Debug)]
pub struct RewriteSystem {
    field: Field,
    rules: Vec<RewriteRule>,
    by_first: HashMap<u32, Vec<usize>>,
    unit_rule: bool,
    bound: usize,
    complete_up_to: usize,
    exhausted: bool,
}

/// Work cap for completion; hitting it lowers `complete_up_to`.
#[derive(Clone, Copy, Debug)]
pub struct CompletionLimits {
    pub max_rules: usize,
}

impl Default for CompletionLimits {
    fn default() -> Self {
        CompletionLimits { max_rules: 20_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Membership {
    Yes,
    /// The normal form is nonzero. `caveat` is set when the system was not
    /// completed through the whole bound.
    NoUpToBound { normal_form: NcPoly, caveat: Option<String> },
}

impl RewriteSystem {
    fn from_rules(field: Field, mut rules: Vec<RewriteRule>, bound: usize, complete_up_to: usize, exhausted: bool) -> Self {
        rules.sort_by(|a, b| a.lead.cmp(&b.lead));
        let mut sys = RewriteSystem {
            field,
            rules: Vec::new(),
            by_first: HashMap::new(),
            unit_rule: false,
            bound,
            complete_up_to,
            exhausted,
        };
        for r in rules {
            sys.push(r);
        }
        sys
    }

    fn push(&mut self, r: RewriteRule) {
        let id = self.rules.len();
        match r.lead.raw().first() {
            Some(&l) => self.by_first.entry(l).or_default().push(id),
            None => self.unit_rule = true,
        }
        self.rules.push(r);
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn rules(&self) -> &[RewriteRule] {
        &self.rules
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    /// All overlaps of degree up to this value were resolved.
    pub fn complete_up_to(&self) -> usize {
        self.complete_up_to
    }

    /// No overlap of any degree was left unresolved: a finite complete system.
    pub fn is_exhausted(&self) -> bool {
        self.exhausted
    }

    pub fn is_truncated(&self) -> bool {
        self.complete_up_to < self.bound
    }

    /// `1` reduces to zero: the quotient is the zero ring.
    pub fn is_trivial(&self) -> bool {
        self.unit_rule
    }

    /// Rule index and position of the leftmost reducible subword of `w`.
    fn find_reducer(&self, w: &Word) -> Option<(usize, usize)> {
        if self.unit_rule {
            let id = self.rules.iter().position(|r| r.lead.is_empty())?;
            return Some((id, 0));
        }
        let letters = w.raw();
        for pos in 0..letters.len() {
            if let Some(cands) = self.by_first.get(&letters[pos]) {
                for &id in cands {
                    let lead = self.rules[id].lead.raw();
                    if letters[pos..].starts_with(lead) {
                        return Some((id, pos));
                    }
                }
            }
        }
        None
    }

    pub fn is_normal_word(&self, w: &Word) -> bool {
        self.find_reducer(w).is_none()
    }

    /// Full reduction without the degree guard. Terminates because deglex is
    /// a well-order and every step replaces a word by strictly smaller ones.
    pub fn reduce(&self, p: &NcPoly) -> NcPoly {
        let mut work = p.clone();
        let mut out = NcPoly::zero();
        while let Some((w, c)) = work.pop_leading() {
            match self.find_reducer(&w) {
                Some((id, pos)) => {
                    let rule = &self.rules[id];
                    let u = w.slice(0, pos);
                    let v = w.slice(pos + rule.lead.len(), w.len());
                    for (rw, rc) in rule.rest.terms() {
                        work.add_term(u.concat(rw).concat(&v), &c * rc);
                    }
                }
                None => out.add_term(w, c),
            }
        }
        out
    }

    pub fn normal_form(&self, p: &NcPoly) -> Result<NcPoly> {
        if let Some(d) = p.degree() {
            if d > self.bound {
                return Err(Error::Truncation { degree: d, bound: self.bound });
            }
        }
        Ok(self.reduce(p))
    }

    /// Normal words of length at most `max_len` over `ngens` letters.
    pub fn normal_words(&self, ngens: usize, max_len: usize) -> Vec<Word> {
        let mut out = Vec::new();
        let mut layer = vec![Word::one()];
        for len in 0..=max_len {
            layer.retain(|w| self.is_normal_word(w));
            out.extend(layer.iter().cloned());
            if len == max_len {
                break;
            }
            layer = layer
                .iter()
                .flat_map(|w| (0..ngens).map(move |l| w.concat(&Word::letter(l))))
                .collect();
        }
        out
    }

    pub fn caveat(&self) -> Option<String> {
        if self.is_truncated() {
            Some(format!(
                "rewrite system complete only up to degree {} < bound {}",
                self.complete_up_to, self.bound
            ))
        } else {
            None
        }
    }
}

pub fn complete(pres: &Presentation) -> RewriteSystem {
    complete_with(pres, CompletionLimits::default())
}

pub fn complete_with(pres: &Presentation, limits: CompletionLimits) -> RewriteSystem {
    let mut c = Completion::new(pres.field(), pres.bound(), limits);
    for r in pres.rels() {
        c.add(r.clone());
    }
    c.run();
    c.finish()
}

pub fn normal_form(p: &NcPoly, sys: &RewriteSystem) -> Result<NcPoly> {
    sys.normal_form(p)
}

pub fn ideal_member(p: &NcPoly, pres: &Presentation) -> Result<Membership> {
    pres.check(p)?;
    let sys = complete(pres);
    member_in(p, &sys)
}

pub fn member_in(p: &NcPoly, sys: &RewriteSystem) -> Result<Membership> {
    let nf = sys.normal_form(p)?;
    if nf.is_zero() {
        Ok(Membership::Yes)
    } else {
        Ok(Membership::NoUpToBound { normal_form: nf, caveat: sys.caveat() })
    }
}

/// Critical pair: overlap word degree, the word itself, then rule ids and
/// overlap length, so that `BTreeSet` order is the processing order.
type Pair = (usize, Word, usize, usize, usize);

struct Completion {
    field: Field,
    bound: usize,
    limits: CompletionLimits,
    rules: Vec<Option<RewriteRule>>,
    live: RewriteSystem,
    pairs: BTreeSet<Pair>,
    skipped: bool,
    stopped_at: Option<usize>,
}

impl Completion {
    fn new(field: Field, bound: usize, limits: CompletionLimits) -> Self {
        Completion {
            field,
            bound,
            limits,
            rules: Vec::new(),
            live: RewriteSystem::from_rules(field, Vec::new(), bound, bound, true),
            pairs: BTreeSet::new(),
            skipped: false,
            stopped_at: None,
        }
    }

    fn rebuild_index(&mut self) {
        let rules: Vec<RewriteRule> = self.rules.iter().flatten().cloned().collect();
        let mut live = RewriteSystem::from_rules(self.field, Vec::new(), self.bound, self.bound, true);
        for r in rules {
            live.push(r);
        }
        self.live = live;
    }

    fn add(&mut self, p: NcPoly) {
        let mut pending = vec![p];
        while let Some(p) = pending.pop() {
            let q = self.live.reduce(&p);
            let Some((lead, _)) = q.leading() else { continue };
            let lead = lead.clone();
            let q = q.monic();
            let mut rest = -&q;
            rest.add_term(lead.clone(), self.field.one());
            // Rules whose lead contains the new lead are no longer reduced.
            let field = self.field;
            for slot in self.rules.iter_mut() {
                if slot.as_ref().is_some_and(|r| r.lead.find(&lead).is_some()) {
                    let old = slot.take().expect("checked");
                    pending.push(old.as_poly(field));
                }
            }
            let id = self.rules.len();
            self.rules.push(Some(RewriteRule { lead, rest }));
            self.rebuild_index();
            self.queue_pairs(id);
        }
    }

    fn queue_pairs(&mut self, new: usize) {
        let new_lead = self.rules[new].as_ref().expect("just inserted").lead.clone();
        for (id, slot) in self.rules.iter().enumerate() {
            let Some(r) = slot else { continue };
            for (a, b, la, lb) in [(new, id, &new_lead, &r.lead), (id, new, &r.lead, &new_lead)] {
                let (sa, sb) = (la.raw(), lb.raw());
                for k in 1..sa.len().min(sb.len()) {
                    if sa[sa.len() - k..] == sb[..k] {
                        let w = la.concat(&lb.slice(k, lb.len()));
                        self.pairs.insert((w.len(), w, a, b, k));
                    }
                }
                if a == b {
                    break;
                }
            }
        }
    }

    fn run(&mut self) {
        while let Some(pair) = self.pairs.pop_first() {
            let (deg, _, a, b, k) = pair;
            if deg > self.bound {
                self.skipped = true;
                self.pairs.clear();
                break;
            }
            let (Some(ra), Some(rb)) = (&self.rules[a], &self.rules[b]) else { continue };
            // lead_a · t = s · lead_b with |t| = |lead_b| - k, |s| = |lead_a| - k.
            let t = rb.lead.slice(k, rb.lead.len());
            let s = ra.lead.slice(0, ra.lead.len() - k);
            let spoly = &ra.rest.sandwich(&Word::one(), &t) - &rb.rest.sandwich(&s, &Word::one());
            self.add(spoly);
            if self.rules.iter().flatten().count() > self.limits.max_rules {
                self.stopped_at = Some(deg.saturating_sub(1));
                self.pairs.clear();
                break;
            }
        }
    }

    fn finish(self) -> RewriteSystem {
        // Inter-reduce tails against the final set of leads.
        let live = self.live;
        let rules: Vec<RewriteRule> = live
            .rules
            .iter()
            .map(|r| RewriteRule { lead: r.lead.clone(), rest: live.reduce(&r.rest) })
            .collect();
        let complete_up_to = self.stopped_at.unwrap_or(self.bound).min(self.bound);
        let exhausted = !self.skipped && self.stopped_at.is_none();
        RewriteSystem::from_rules(self.field, rules, self.bound, complete_up_to, exhausted)
    }
}
