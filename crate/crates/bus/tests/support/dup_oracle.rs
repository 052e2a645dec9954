//! Brute-force reference for the duplication detector and corpus builders.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use facet_bus::dup::{detect, tokenize, DuplicationReport};
use facet_core::builtin::java_lite;
use facet_core::{EntityId, Model, SourceAnchor};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Each body goes into its own file behind a one-line header, so anchors
/// start past the beginning of the file.
pub fn corpus(bodies: &[String]) -> (Model, Vec<EntityId>) {
    let mut m = Model::new("dup", Arc::new(java_lite().unwrap()));
    let mut ids = Vec::new();
    for (i, body) in bodies.iter().enumerate() {
        let file = format!("src/F{i}.java");
        let header = "// header\n";
        m.add_source_text(&file, format!("{header}{body}\n"));
        let e = m.create_named_type("Method").unwrap();
        let start = header.chars().count() + 1;
        let anchor = SourceAnchor {
            file,
            start,
            end: start + body.chars().count() - 1,
        };
        m.set_source_anchor(e, anchor).unwrap();
        ids.push(e);
    }
    (m, ids)
}

/// (entity, first char, last char) of one occurrence, 1-based in the file.
pub type Span = (EntityId, usize, usize);

/// Every fragment as its token text plus occurrence spans.
pub fn reported(report: &DuplicationReport) -> BTreeSet<(Vec<String>, BTreeSet<Span>)> {
    let mut by_fragment: BTreeMap<u32, BTreeSet<Span>> = BTreeMap::new();
    for e in &report.entities {
        for o in &e.occurrences {
            by_fragment
                .entry(o.fragment)
                .or_default()
                .insert((o.entity, o.start, o.end));
        }
    }
    report
        .fragments
        .iter()
        .map(|f| {
            let tokens = tokenize(&f.text)
                .iter()
                .map(|t| t.text.to_owned())
                .collect();
            (tokens, by_fragment.remove(&f.id).unwrap_or_default())
        })
        .collect()
}

/// Token text with its character offsets inside the entity's slice.
type RawToken = (String, usize, usize);

/// Brute force over every window of every length: a repeated window is
/// maximal when its occurrences cannot all be extended by the same token on
/// the left, nor all on the right.
pub fn oracle(
    model: &Model,
    ids: &[EntityId],
    min_tokens: usize,
) -> BTreeSet<(Vec<String>, BTreeSet<Span>)> {
    let streams: Vec<(EntityId, usize, Vec<RawToken>)> = ids
        .iter()
        .map(|&e| {
            let text = model.source_slice(e).unwrap();
            let base = model.source_anchor(e).unwrap().start;
            let toks = tokenize(&text)
                .into_iter()
                .map(|t| (t.text.to_owned(), t.start, t.end))
                .collect();
            (e, base, toks)
        })
        .collect();
    let longest = streams.iter().map(|s| s.2.len()).max().unwrap_or(0);
    let mut out = BTreeSet::new();
    for len in min_tokens..=longest {
        let mut windows: BTreeMap<Vec<&str>, Vec<(usize, usize)>> = BTreeMap::new();
        for (si, (_, _, toks)) in streams.iter().enumerate() {
            for start in 0..toks.len().saturating_sub(len - 1) {
                let key = toks[start..start + len]
                    .iter()
                    .map(|t| t.0.as_str())
                    .collect();
                windows.entry(key).or_default().push((si, start));
            }
        }
        for (key, occ) in windows {
            if occ.len() < 2 {
                continue;
            }
            let token_at = |si: usize, pos: Option<usize>| {
                pos.and_then(|p| streams[si].2.get(p)).map(|t| t.0.as_str())
            };
            let lefts: Vec<Option<&str>> = occ
                .iter()
                .map(|&(si, s)| token_at(si, s.checked_sub(1)))
                .collect();
            let rights: Vec<Option<&str>> = occ
                .iter()
                .map(|&(si, s)| token_at(si, Some(s + len)))
                .collect();
            let extendable = |v: &[Option<&str>]| v[0].is_some() && v.iter().all(|x| *x == v[0]);
            if extendable(&lefts) || extendable(&rights) {
                continue;
            }
            let spans = occ
                .iter()
                .map(|&(si, s)| {
                    let (e, base, toks) = &streams[si];
                    (*e, base + toks[s].1, base + toks[s + len - 1].2 - 1)
                })
                .collect();
            out.insert((key.into_iter().map(str::to_owned).collect(), spans));
        }
    }
    out
}

/// Unique filler tokens around planted clones: the detector must report
/// exactly the planted snippets at exactly the planted places.
pub fn planted(seed: u64, min_tokens: usize) -> Result<(), String> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut fresh = 0usize;
    let filler = |rng: &mut StdRng, fresh: &mut usize| {
        let n = rng.random_range(0..6);
        (0..n)
            .map(|_| {
                *fresh += 1;
                format!("u{fresh}")
            })
            .collect::<Vec<_>>()
    };
    let clones: Vec<Vec<String>> = (0..rng.random_range(1..4))
        .map(|c| {
            let len = rng.random_range(min_tokens..min_tokens + 8);
            (0..len)
                .map(|i| {
                    if i % 3 == 2 {
                        ";".to_owned()
                    } else {
                        format!("c{c}t{i}")
                    }
                })
                .collect()
        })
        .collect();
    let n_entities = rng.random_range(2..6);
    let mut bodies: Vec<Vec<String>> = (0..n_entities)
        .map(|_| filler(&mut rng, &mut fresh))
        .collect();
    let mut planted_counts = vec![0; clones.len()];
    for (c, clone) in clones.iter().enumerate() {
        let copies = rng.random_range(2..4);
        for _ in 0..copies {
            let e = rng.random_range(0..n_entities);
            bodies[e].extend(clone.iter().cloned());
            let tail = filler(&mut rng, &mut fresh);
            bodies[e].extend(tail);
            // Keep copies apart so they cannot fuse into a longer repeat.
            fresh += 1;
            bodies[e].push(format!("u{fresh}"));
            planted_counts[c] += 1;
        }
    }
    let texts: Vec<String> = bodies
        .iter()
        .enumerate()
        .map(|(i, b)| format!("e{i} {}", b.join(" ")))
        .collect();
    let size: usize = texts.iter().map(String::len).sum();
    if size > 2048 {
        return Err(format!("seed {seed}: corpus of {size} bytes"));
    }
    let (m, ids) = corpus(&texts);
    let report = detect(&m, &ids, min_tokens);
    let got = reported(&report);
    if got != oracle(&m, &ids, min_tokens) {
        return Err(format!("seed {seed}: detector and oracle disagree"));
    }

    let expected: BTreeSet<(Vec<String>, usize)> = clones
        .iter()
        .zip(&planted_counts)
        .map(|(c, n)| (c.clone(), *n))
        .collect();
    let found: BTreeSet<(Vec<String>, usize)> = got
        .into_iter()
        .map(|(tokens, spans)| (tokens, spans.len()))
        .collect();
    if found != expected {
        return Err(format!(
            "seed {seed}: found {found:?}, planted {expected:?}"
        ));
    }
    Ok(())
}

/// Tiny alphabets produce many accidental repeats; the oracle decides.
pub fn dense(seed: u64, min_tokens: usize) -> Result<(), String> {
    let mut rng = StdRng::seed_from_u64(seed);
    let alphabet = ["a", "b", "c", "(", ")", ";"];
    let bodies: Vec<String> = (0..rng.random_range(1..5))
        .map(|_| {
            (0..rng.random_range(1..60))
                .map(|_| alphabet[rng.random_range(0..alphabet.len())])
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect();
    let (m, ids) = corpus(&bodies);
    if reported(&detect(&m, &ids, min_tokens)) != oracle(&m, &ids, min_tokens) {
        return Err(format!("seed {seed}: detector and oracle disagree"));
    }
    Ok(())
}
