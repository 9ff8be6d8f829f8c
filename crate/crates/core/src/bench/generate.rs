use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::CorpusFile;
use crate::grammar::{Grammar, ProdId, RuleId, Symbol};

/// For each rule, the height of its shallowest derivation tree.
fn min_heights(grm: &Grammar) -> Vec<u32> {
    let mut h = vec![u32::MAX; grm.rules_len()];
    loop {
        let mut changed = false;
        for p in grm.prod_ids() {
            let prod = grm.prod(p);
            let mut ph = 0u32;
            for s in &prod.symbols {
                if let Symbol::Rule(r) = s {
                    ph = ph.max(h[r.index()]);
                }
            }
            let ph = ph.saturating_add(1);
            if ph < h[prod.rule.index()] {
                h[prod.rule.index()] = ph;
                changed = true;
            }
        }
        if !changed {
            return h;
        }
    }
}

fn prod_height(grm: &Grammar, h: &[u32], p: ProdId) -> u32 {
    grm.prod(p)
        .symbols
        .iter()
        .map(|s| match s {
            Symbol::Rule(r) => h[r.index()],
            Symbol::Token(_) => 0,
        })
        .max()
        .unwrap_or(0)
}

/// Generates `count` random sentences of the grammar with at least `min_tokens` tokens each.
/// Below `max_depth` productions are picked uniformly; past it, the shallowest production of
/// each rule is used so that generation terminates. Sentences that come out too short are
/// discarded and regenerated. Tokens are rendered with a random entry of `lexemes[name]`, or
/// their name if absent, separated by spaces.
pub fn generate_programs(
    grm: &Grammar,
    lexemes: &BTreeMap<String, Vec<String>>,
    seed: u64,
    count: usize,
    max_depth: usize,
    min_tokens: usize,
) -> Vec<CorpusFile> {
    let h = min_heights(grm);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut files = Vec::with_capacity(count);
    while files.len() < count {
        let out = sentence(grm, &h, lexemes, max_depth, &mut rng);
        if out.len() >= min_tokens {
            files.push(CorpusFile {
                name: format!("gen{:05}", files.len()),
                src: out.join(" "),
            });
        }
    }
    files
}

fn sentence(
    grm: &Grammar,
    h: &[u32],
    lexemes: &BTreeMap<String, Vec<String>>,
    max_depth: usize,
    rng: &mut impl Rng,
) -> Vec<String> {
    let mut out = Vec::new();
    let mut todo: Vec<(Symbol, usize)> = vec![(Symbol::Rule(grm.start_rule()), 0)];
    while let Some((sym, depth)) = todo.pop() {
        match sym {
            Symbol::Token(t) => {
                let name = grm.token_name(t);
                let l = lexemes
                    .get(name)
                    .and_then(|ls| ls.choose(rng))
                    .map_or(name, String::as_str);
                out.push(l.to_owned());
            }
            Symbol::Rule(r) => {
                let p = choose_prod(grm, h, r, depth >= max_depth, rng);
                for s in grm.prod(p).symbols.iter().rev() {
                    todo.push((*s, depth + 1));
                }
            }
        }
    }
    out
}

fn choose_prod(grm: &Grammar, h: &[u32], r: RuleId, shallow: bool, rng: &mut impl Rng) -> ProdId {
    let prods = &grm.rule(r).prods;
    if shallow {
        *prods
            .iter()
            .min_by_key(|p| prod_height(grm, h, **p))
            .unwrap()
    } else {
        prods[rng.gen_range(0..prods.len())]
    }
}
