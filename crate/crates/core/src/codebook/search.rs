//! Constant-weight code search.
//!
//! Candidate words are the vertices of a conflict graph (edge = distance
//! below `d_min` or a concatenation run above `max_run`); a code is an
//! independent set. The search seeds greedily in lexicographic order, then
//! improves by local moves: add a free word, swap a word with its single
//! blocker, or force a word in and evict everything it conflicts with
//! (the backtracking step). Restarts reseed from a shuffled order.

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{concat_runs, mask, Codebook, Codeword};
use crate::error::{Error, Result};

const MAX_CANDIDATES: usize = 1 << 15;
const TABU_TENURE: usize = 7;

#[derive(Clone, Debug, PartialEq)]
pub struct SearchParams {
    pub n: usize,
    pub w: usize,
    pub d_min: u32,
    pub max_run: Option<u32>,
    pub target_size: usize,
    pub seed: u64,
    pub restarts: usize,
    pub iterations: usize,
}

impl SearchParams {
    pub fn new(n: usize, w: usize, d_min: u32, target_size: usize) -> Self {
        SearchParams {
            n,
            w,
            d_min,
            max_run: None,
            target_size,
            seed: 0,
            restarts: 64,
            iterations: 20_000,
        }
    }
}

fn binomial(n: usize, k: usize) -> usize {
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

fn weight_w_words(n: usize, w: usize) -> Vec<u64> {
    if w == 0 {
        return vec![0];
    }
    let mut out = Vec::new();
    let mut v: u64 = mask(w);
    let limit = mask(n);
    while v <= limit {
        out.push(v);
        // Gosper's hack: next integer with the same popcount.
        let t = v | (v - 1);
        let Some(next) = t.checked_add(1) else { break };
        v = next | (((!t & next) - 1) >> (v.trailing_zeros() + 1));
        if v == 0 {
            break;
        }
    }
    out
}

struct Graph {
    words: Vec<Codeword>,
    adj: Vec<Vec<u32>>,
}

fn build_graph(p: &SearchParams) -> Result<Graph> {
    let mut words: Vec<Codeword> = weight_w_words(p.n, p.w)
        .into_iter()
        .map(|v| Codeword::new(v, p.n).expect("fits in n chips"))
        .collect();
    if let Some(run) = p.max_run {
        words.retain(|c| concat_runs(c, c).iter().all(|&r| r <= run));
    }
    let run_ok = |a: &Codeword, b: &Codeword| match p.max_run {
        None => true,
        Some(run) => concat_runs(a, b).iter().all(|&r| r <= run),
    };
    let mut adj = vec![Vec::new(); words.len()];
    for i in 0..words.len() {
        for j in i + 1..words.len() {
            let (a, b) = (&words[i], &words[j]);
            let d = (a.value() ^ b.value()).count_ones();
            if d < p.d_min || !run_ok(a, b) || !run_ok(b, a) {
                adj[i].push(j as u32);
                adj[j].push(i as u32);
            }
        }
    }
    Ok(Graph { words, adj })
}

struct State<'g> {
    g: &'g Graph,
    member: Vec<bool>,
    blockers: Vec<u32>,
    size: usize,
}

impl<'g> State<'g> {
    fn new(g: &'g Graph) -> Self {
        State {
            g,
            member: vec![false; g.words.len()],
            blockers: vec![0; g.words.len()],
            size: 0,
        }
    }

    fn add(&mut self, v: usize) {
        self.member[v] = true;
        self.size += 1;
        for &u in &self.g.adj[v] {
            self.blockers[u as usize] += 1;
        }
    }

    fn remove(&mut self, v: usize) {
        self.member[v] = false;
        self.size -= 1;
        for &u in &self.g.adj[v] {
            self.blockers[u as usize] -= 1;
        }
    }

    fn members(&self) -> Vec<usize> {
        (0..self.member.len()).filter(|&v| self.member[v]).collect()
    }
}

/// Searches for `target_size` weight-`w` words of length `n` at pairwise
/// distance at least `d_min`, optionally bounding every run inside a word and
/// across any ordered concatenation of two words by `max_run`.
///
/// The first `2^k` words (largest `k` that fits) become data entries in
/// descending numeric order; the remainder are returned as control symbols.
/// Failure only means the budget ran out.
pub fn search_constant_weight_code(p: &SearchParams) -> Result<Codebook> {
    if p.n == 0 || p.n > 63 || p.w > p.n {
        return Err(Error::InvalidParameter(format!("need 0 <= w <= n <= 63, got n={}, w={}", p.n, p.w)));
    }
    if p.d_min % 2 != 0 {
        return Err(Error::InvalidParameter(format!("d_min must be even, got {}", p.d_min)));
    }
    if p.target_size == 0 {
        return Err(Error::InvalidParameter("target size must be positive".into()));
    }
    if binomial(p.n, p.w) > MAX_CANDIDATES {
        return Err(Error::InvalidParameter(format!(
            "C({}, {}) candidate words exceed the search limit",
            p.n, p.w
        )));
    }

    let g = build_graph(p)?;
    let nv = g.words.len();
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut best: Vec<usize> = Vec::new();

    'restarts: for restart in 0..p.restarts.max(1) {
        let mut order: Vec<usize> = (0..nv).collect();
        if restart > 0 {
            order.shuffle(&mut rng);
        }
        let mut s = State::new(&g);
        for &v in &order {
            if s.blockers[v] == 0 {
                s.add(v);
                if s.size >= p.target_size {
                    break;
                }
            }
        }
        if s.size > best.len() {
            best = s.members();
        }
        if best.len() >= p.target_size {
            break;
        }

        let mut tabu = vec![0usize; nv];
        for it in 1..=p.iterations {
            let free: Vec<usize> = (0..nv)
                .filter(|&v| !s.member[v] && s.blockers[v] == 0)
                .collect();
            if let Some(&v) = free.choose(&mut rng) {
                s.add(v);
                if s.size > best.len() {
                    best = s.members();
                }
                if best.len() >= p.target_size {
                    break 'restarts;
                }
                continue;
            }

            let swappable: Vec<usize> = (0..nv)
                .filter(|&v| !s.member[v] && s.blockers[v] == 1 && tabu[v] < it)
                .collect();
            let v = match swappable.choose(&mut rng) {
                Some(&v) if rng.random_bool(0.9) => v,
                _ => match (0..nv).filter(|&v| !s.member[v]).collect::<Vec<_>>().choose(&mut rng) {
                    Some(&v) => v,
                    None => break,
                },
            };
            let evicted: Vec<usize> = g.adj[v]
                .iter()
                .map(|&u| u as usize)
                .filter(|&u| s.member[u])
                .collect();
            for u in evicted {
                s.remove(u);
                tabu[u] = it + TABU_TENURE;
            }
            s.add(v);
        }
    }

    if best.len() < p.target_size {
        return Err(Error::SearchExhausted {
            target: p.target_size,
            best: best.len(),
        });
    }

    let mut words: Vec<Codeword> = best.iter().map(|&v| g.words[v]).collect();
    words.sort_by(|a, b| b.cmp(a));
    let k = (usize::BITS - 1 - words.len().leading_zeros()) as usize;
    let control = words.split_off(1 << k);
    let entries = words
        .into_iter()
        .enumerate()
        .map(|(i, cw)| (i as u32, cw))
        .collect();
    Codebook::new(k, p.n, entries, control, Some(p.w as u32))
}
