use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::CorpusFile;
use crate::Language;

/// Breaks files by applying `edits` random token edits to each: deleting a token, inserting
/// a lexeme seen elsewhere in the corpus, or swapping two adjacent tokens. Edited files are
/// re-rendered with single spaces between tokens. The result depends only on the inputs and
/// `seed`. Files that do not lex, and all files when `edits` is 0, are returned unchanged.
pub fn mutate_corpus(
    files: &[CorpusFile],
    lang: &Language,
    seed: u64,
    edits: usize,
) -> Vec<CorpusFile> {
    if edits == 0 {
        return files.to_vec();
    }
    let lexed: Vec<Option<Vec<String>>> = files
        .iter()
        .map(|f| {
            lang.lex(&f.src).ok().map(|toks| {
                toks.iter()
                    .filter_map(|t| t.lexeme(&f.src))
                    .filter(|l| !l.is_empty())
                    .map(str::to_owned)
                    .collect()
            })
        })
        .collect();
    let pool: Vec<String> = lexed
        .iter()
        .flatten()
        .flatten()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    files
        .iter()
        .zip(lexed)
        .map(|(f, toks)| {
            let Some(mut toks) = toks else {
                return f.clone();
            };
            for _ in 0..edits {
                match rng.gen_range(0..3) {
                    0 if !toks.is_empty() => {
                        let i = rng.gen_range(0..toks.len());
                        toks.remove(i);
                    }
                    2 if toks.len() >= 2 => {
                        let i = rng.gen_range(0..toks.len() - 1);
                        toks.swap(i, i + 1);
                    }
                    _ => {
                        if let Some(l) = pool.choose(&mut rng) {
                            let i = rng.gen_range(0..=toks.len());
                            toks.insert(i, l.clone());
                        }
                    }
                }
            }
            CorpusFile {
                name: f.name.clone(),
                src: toks.join(" "),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn corpus() -> Vec<CorpusFile> {
        ["a = 1 ;", "b = ( a + 2 ) ;", "x ;"]
            .iter()
            .enumerate()
            .map(|(i, s)| CorpusFile {
                name: format!("f{}", i),
                src: s.to_string(),
            })
            .collect()
    }

    #[test]
    fn deterministic_for_a_seed() {
        let lang = fixtures::stmts();
        let a = mutate_corpus(&corpus(), &lang, 7, 2);
        assert_eq!(a, mutate_corpus(&corpus(), &lang, 7, 2));
        assert_ne!(a, mutate_corpus(&corpus(), &lang, 8, 2));
    }

    #[test]
    fn zero_edits_is_identity() {
        let lang = fixtures::stmts();
        assert_eq!(mutate_corpus(&corpus(), &lang, 1, 0), corpus());
    }

    #[test]
    fn edited_files_still_lex() {
        let lang = fixtures::stmts();
        for f in mutate_corpus(&corpus(), &lang, 3, 4) {
            assert!(lang.lex(&f.src).is_ok(), "{}", f.src);
        }
    }
}
