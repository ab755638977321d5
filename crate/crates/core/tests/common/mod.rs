//! Brute-force reference implementations. Deliberately naive and
//! independent of the library's algorithms.
#![allow(dead_code)]
pub mod cases;

use std::collections::{HashMap, HashSet, VecDeque};

/// Every n-gram by position, counted with nested loops.
pub fn ngram_multiset(tokens: &[&str], n: usize) -> Vec<(Vec<String>, usize)> {
    let mut out: Vec<(Vec<String>, usize)> = Vec::new();
    if tokens.len() < n {
        return out;
    }
    for start in 0..=tokens.len() - n {
        let g: Vec<String> = tokens[start..start + n].iter().map(|s| s.to_string()).collect();
        match out.iter_mut().find(|(x, _)| *x == g) {
            Some((_, c)) => *c += 1,
            None => out.push((g, 1)),
        }
    }
    out
}

/// (clipped matches, hyp n-gram total) for orders 1..=4.
pub fn bleu_counts(hyp: &[&str], reference: &[&str]) -> [(u64, u64); 4] {
    let mut out = [(0, 0); 4];
    for n in 1..=4 {
        let h = ngram_multiset(hyp, n);
        let r = ngram_multiset(reference, n);
        let total: usize = h.iter().map(|(_, c)| c).sum();
        let clipped: usize = h
            .iter()
            .map(|(g, c)| {
                let rc = r.iter().find(|(x, _)| x == g).map_or(0, |(_, c)| *c);
                (*c).min(rc)
            })
            .sum();
        out[n - 1] = (clipped as u64, total as u64);
    }
    out
}

/// Corpus chrF computed straight from the definition.
pub fn chrf(pairs: &[(&str, &str)], order: usize, beta: f64) -> f64 {
    let mut sums = vec![(0usize, 0usize, 0usize); order];
    for (h, r) in pairs {
        let h: Vec<char> = h.chars().filter(|c| !c.is_whitespace()).collect();
        let r: Vec<char> = r.chars().filter(|c| !c.is_whitespace()).collect();
        for n in 1..=order {
            let grams = |v: &Vec<char>| -> Vec<String> {
                if v.len() < n {
                    vec![]
                } else {
                    (0..=v.len() - n).map(|i| v[i..i + n].iter().collect()).collect()
                }
            };
            let hg = grams(&h);
            let mut rg = grams(&r);
            let mut matches = 0;
            for g in &hg {
                if let Some(p) = rg.iter().position(|x| x == g) {
                    rg.remove(p);
                    matches += 1;
                }
            }
            sums[n - 1].0 += hg.len();
            sums[n - 1].1 += grams(&r).len();
            sums[n - 1].2 += matches;
        }
    }
    let b2 = beta * beta;
    let mut f = Vec::new();
    for (hn, rn, m) in sums {
        if hn == 0 || rn == 0 {
            continue;
        }
        let p = m as f64 / hn as f64;
        let r = m as f64 / rn as f64;
        f.push(if p + r == 0.0 { 0.0 } else { (1.0 + b2) * p * r / (b2 * p + r) });
    }
    if f.is_empty() {
        0.0
    } else {
        100.0 * f.iter().sum::<f64>() / f.len() as f64
    }
}

/// Is `sub` a subsequence of `seq`?
fn is_subsequence(sub: &[&str], seq: &[&str]) -> bool {
    let mut it = seq.iter();
    sub.iter().all(|s| it.any(|x| x == s))
}

/// LCS by enumerating every subsequence of `a` (|a| <= ~16).
pub fn lcs_exhaustive(a: &[&str], b: &[&str]) -> usize {
    let mut best = 0;
    for mask in 0u32..(1 << a.len()) {
        let sub: Vec<&str> = (0..a.len()).filter(|i| mask & (1 << i) != 0).map(|i| a[i]).collect();
        if sub.len() > best && is_subsequence(&sub, b) {
            best = sub.len();
        }
    }
    best
}

pub fn rouge_l(h: &[&str], r: &[&str]) -> f64 {
    if h.is_empty() || r.is_empty() {
        return 0.0;
    }
    let l = lcs_exhaustive(h, r) as f64;
    if l == 0.0 {
        return 0.0;
    }
    let p = l / h.len() as f64;
    let rc = l / r.len() as f64;
    2.0 * p * rc / (p + rc)
}

/// METEOR (exact stage only) evaluated from a hand-stated alignment size
/// and chunk count.
pub fn meteor_formula(hyp_len: usize, ref_len: usize, matches: usize, chunks: usize) -> f64 {
    if matches == 0 {
        return 0.0;
    }
    let m = matches as f64;
    let p = m / hyp_len as f64;
    let r = m / ref_len as f64;
    let fmean = 10.0 * p * r / (r + 9.0 * p);
    fmean * (1.0 - 0.5 * (chunks as f64 / m).powi(3))
}

/// Levenshtein distance by plain recursion with memo.
pub fn word_edit_distance(a: &[&str], b: &[&str]) -> usize {
    fn go(a: &[&str], b: &[&str], memo: &mut HashMap<(usize, usize), usize>) -> usize {
        if a.is_empty() {
            return b.len();
        }
        if b.is_empty() {
            return a.len();
        }
        if let Some(&v) = memo.get(&(a.len(), b.len())) {
            return v;
        }
        let v = if a[0] == b[0] {
            go(&a[1..], &b[1..], memo)
        } else {
            1 + go(&a[1..], b, memo)
                .min(go(a, &b[1..], memo))
                .min(go(&a[1..], &b[1..], memo))
        };
        memo.insert((a.len(), b.len()), v);
        v
    }
    go(a, b, &mut HashMap::new())
}

/// Minimum over any sequence of block shifts of (#shifts + edit distance),
/// found by breadth-first search over reachable orderings.
pub fn ter_exhaustive(hyp: &[&str], reference: &[&str]) -> usize {
    let start: Vec<&str> = hyp.to_vec();
    let mut best = word_edit_distance(&start, reference);
    let mut seen: HashSet<Vec<&str>> = HashSet::new();
    seen.insert(start.clone());
    let mut queue = VecDeque::from([(start, 0usize)]);
    while let Some((seq, shifts)) = queue.pop_front() {
        if shifts + 1 >= best {
            continue;
        }
        let n = seq.len();
        for s in 0..n {
            for len in 1..=n - s {
                let block: Vec<&str> = seq[s..s + len].to_vec();
                let mut rest = seq.clone();
                rest.drain(s..s + len);
                for d in 0..=rest.len() {
                    if d == s {
                        continue;
                    }
                    let mut next = rest.clone();
                    for (k, w) in block.iter().enumerate() {
                        next.insert(d + k, w);
                    }
                    if seen.insert(next.clone()) {
                        let cost = shifts + 1 + word_edit_distance(&next, reference);
                        best = best.min(cost);
                        queue.push_back((next, shifts + 1));
                    }
                }
            }
        }
    }
    best
}
