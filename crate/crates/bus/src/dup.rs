//! Token-based duplication detection.
//!
//! Each entity's anchored source text is tokenized; the token streams are
//! concatenated with a distinct sentinel between them and a suffix array is
//! built over the result. Every LCP interval whose length reaches the minimum
//! and whose occurrences are not all preceded by the same token is a maximal
//! repeat, reported as one fragment.

use std::collections::{BTreeMap, HashMap};

use facet_core::{EntityId, Model};
use serde::Serialize;

pub const DEFAULT_MIN_TOKENS: usize = 5;

/// A token with its character span in the tokenized text (0-based, end
/// exclusive).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Token<'a> {
    pub text: &'a str,
    pub start: usize,
    pub end: usize,
}

/// Identifier-like runs (letters, digits, `_`) and single punctuation
/// characters; whitespace separates tokens and is dropped.
pub fn tokenize(text: &str) -> Vec<Token<'_>> {
    let mut tokens = Vec::new();
    let mut chars = text.char_indices().enumerate().peekable();
    while let Some((ci, (bi, c))) = chars.next() {
        if c.is_whitespace() {
            continue;
        }
        if c.is_alphanumeric() || c == '_' {
            let mut end_ci = ci + 1;
            let mut end_bi = bi + c.len_utf8();
            while let Some(&(_, (nbi, nc))) = chars.peek() {
                if !(nc.is_alphanumeric() || nc == '_') {
                    break;
                }
                end_ci += 1;
                end_bi = nbi + nc.len_utf8();
                chars.next();
            }
            tokens.push(Token {
                text: &text[bi..end_bi],
                start: ci,
                end: end_ci,
            });
        } else {
            tokens.push(Token {
                text: &text[bi..bi + c.len_utf8()],
                start: ci,
                end: ci + 1,
            });
        }
    }
    tokens
}

/// Suffix array by prefix doubling.
pub fn suffix_array(s: &[u32]) -> Vec<usize> {
    let n = s.len();
    let mut sa: Vec<usize> = (0..n).collect();
    let mut rank: Vec<u64> = s.iter().map(|&x| x as u64).collect();
    let mut tmp = vec![0u64; n];
    let mut k = 1;
    if n < 2 {
        return sa;
    }
    loop {
        let key = |i: usize, rank: &[u64]| (rank[i], if i + k < n { rank[i + k] + 1 } else { 0 });
        sa.sort_by_key(|&i| key(i, &rank));
        tmp[sa[0]] = 0;
        for w in 1..n {
            let bump = key(sa[w - 1], &rank) != key(sa[w], &rank);
            tmp[sa[w]] = tmp[sa[w - 1]] + bump as u64;
        }
        std::mem::swap(&mut rank, &mut tmp);
        if rank[sa[n - 1]] as usize == n - 1 {
            break;
        }
        k *= 2;
    }
    sa
}

/// `lcp[i]` is the common prefix length of suffixes `sa[i - 1]` and `sa[i]`
/// (Kasai et al.); `lcp[0]` is 0.
pub fn lcp_array(s: &[u32], sa: &[usize]) -> Vec<usize> {
    let n = s.len();
    let mut rank = vec![0; n];
    for (i, &p) in sa.iter().enumerate() {
        rank[p] = i;
    }
    let mut lcp = vec![0; n];
    let mut h = 0;
    for i in 0..n {
        if rank[i] > 0 {
            let j = sa[rank[i] - 1];
            while i + h < n && j + h < n && s[i + h] == s[j + h] {
                h += 1;
            }
            lcp[rank[i]] = h;
            h = h.saturating_sub(1);
        } else {
            h = 0;
        }
    }
    lcp
}

/// Maximal repeats of length at least `min_len`: (length, sorted start
/// positions). Symbols must make every boundary unique, so no repeat
/// crosses one.
pub fn maximal_repeats(s: &[u32], min_len: usize) -> Vec<(usize, Vec<usize>)> {
    let n = s.len();
    if n < 2 {
        return Vec::new();
    }
    let sa = suffix_array(s);
    let lcp = lcp_array(s, &sa);
    let mut out = Vec::new();
    let mut report = |len: usize, lb: usize, rb: usize| {
        if len < min_len.max(1) {
            return;
        }
        let mut positions: Vec<usize> = sa[lb..=rb].to_vec();
        positions.sort_unstable();
        let before = |p: usize| if p == 0 { None } else { Some(s[p - 1]) };
        let first = before(positions[0]);
        let left_maximal = first.is_none() || positions.iter().any(|&p| before(p) != first);
        if left_maximal {
            out.push((len, positions));
        }
    };
    // Stack of (lcp value, left bound) for the LCP-interval tree.
    let mut stack: Vec<(usize, usize)> = vec![(0, 0)];
    for i in 1..=n {
        let cur = lcp.get(i).copied().unwrap_or(0);
        let mut lb = i - 1;
        while cur < stack.last().expect("root").0 {
            let (len, left) = stack.pop().expect("non-empty");
            report(len, left, i - 1);
            lb = left;
        }
        if cur > stack.last().expect("root").0 {
            stack.push((cur, lb));
        }
    }
    out.sort();
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Occurrence {
    pub fragment: u32,
    pub entity: EntityId,
    pub file: String,
    /// 1-based inclusive character offsets in `file`.
    pub start: usize,
    pub end: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Fragment {
    pub id: u32,
    pub color: String,
    pub tokens: usize,
    pub text: String,
    pub occurrences: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EntityOccurrences {
    pub entity: EntityId,
    pub occurrences: Vec<Occurrence>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Skipped {
    pub entity: EntityId,
    pub reason: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct DuplicationReport {
    pub min_tokens: usize,
    pub fragments: Vec<Fragment>,
    pub entities: Vec<EntityOccurrences>,
    pub skipped: Vec<Skipped>,
}

/// Fixed color for a fragment id: hues spread by the golden angle.
pub fn fragment_color(id: u32) -> String {
    let hue = (id as f64 * 137.507_764) % 360.0;
    let (s, l) = (0.65, 0.5);
    let c = (1.0 - (2.0 * l - 1.0f64).abs()) * s;
    let x = c * (1.0 - ((hue / 60.0) % 2.0 - 1.0).abs());
    let m = l - c / 2.0;
    let (r, g, b) = match (hue / 60.0) as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let byte = |v: f64| ((v + m) * 255.0).round() as u8;
    format!("#{:02X}{:02X}{:02X}", byte(r), byte(g), byte(b))
}

/// Finds duplicated token sequences among the given entities' source texts.
/// Entities without a usable anchor are listed under `skipped`.
pub fn detect(model: &Model, entities: &[EntityId], min_tokens: usize) -> DuplicationReport {
    let min_tokens = min_tokens.max(1);
    let mut report = DuplicationReport {
        min_tokens,
        ..Default::default()
    };

    struct Source {
        entity: EntityId,
        file: String,
        base: usize,
        text: String,
    }
    let mut sources = Vec::new();
    for &e in entities {
        let anchor = model.source_anchor(e);
        match (anchor, model.source_slice(e)) {
            (Some(anchor), Some(text)) => sources.push(Source {
                entity: e,
                file: anchor.file,
                base: anchor.start,
                text,
            }),
            _ => report.skipped.push(Skipped {
                entity: e,
                reason: "no source anchor".into(),
            }),
        }
    }

    // Symbols 0..sources are sentinels; token symbols follow.
    let mut vocabulary: HashMap<&str, u32> = HashMap::new();
    let mut symbols = Vec::new();
    // For each symbol position: (source index, token span) or None.
    let mut origin: Vec<Option<(usize, usize, usize)>> = Vec::new();
    let token_lists: Vec<Vec<Token>> = sources.iter().map(|s| tokenize(&s.text)).collect();
    let sentinel_count = sources.len() as u32;
    for (si, tokens) in token_lists.iter().enumerate() {
        for t in tokens {
            let next = sentinel_count + vocabulary.len() as u32;
            symbols.push(*vocabulary.entry(t.text).or_insert(next));
            origin.push(Some((si, t.start, t.end)));
        }
        symbols.push(si as u32);
        origin.push(None);
    }

    let repeats = maximal_repeats(&symbols, min_tokens);
    // Ids follow the position of the first occurrence, then length.
    let mut ordered: Vec<&(usize, Vec<usize>)> = repeats.iter().collect();
    ordered.sort_by_key(|(len, pos)| (pos[0], std::cmp::Reverse(*len)));

    let mut per_entity: BTreeMap<usize, Vec<Occurrence>> = BTreeMap::new();
    for (index, (len, positions)) in ordered.into_iter().enumerate() {
        let id = index as u32 + 1;
        let (si, first_start, _) = origin[positions[0]].expect("repeats avoid sentinels");
        let (_, _, first_end) = origin[positions[0] + len - 1].expect("repeats avoid sentinels");
        let text: String = sources[si]
            .text
            .chars()
            .skip(first_start)
            .take(first_end - first_start)
            .collect();
        report.fragments.push(Fragment {
            id,
            color: fragment_color(id),
            tokens: *len,
            text,
            occurrences: positions.len(),
        });
        for &p in positions {
            let (si, start, _) = origin[p].expect("repeats avoid sentinels");
            let (_, _, end) = origin[p + len - 1].expect("repeats avoid sentinels");
            let source = &sources[si];
            per_entity.entry(si).or_default().push(Occurrence {
                fragment: id,
                entity: source.entity,
                file: source.file.clone(),
                start: source.base + start,
                end: source.base + end - 1,
            });
        }
    }
    report.entities = per_entity
        .into_iter()
        .map(|(si, mut occurrences)| {
            occurrences.sort_by_key(|o| (o.start, o.end, o.fragment));
            EntityOccurrences {
                entity: sources[si].entity,
                occurrences,
            }
        })
        .collect();
    report
}
