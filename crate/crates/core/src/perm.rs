//! Sign-respecting permutations of the 2n literal points.

use std::fmt;

use thiserror::Error;

use crate::clause::{Clause, Lit};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PermError {
    #[error("cycle parse error at column {col}: {msg}")]
    Parse { col: usize, msg: String },
    #[error("image of {lit} contradicts sign-respect (forced to {forced}, given {given})")]
    WnConflict { lit: i32, forced: i32, given: i32 },
    #[error("point {0} appears more than once")]
    NotBijective(i32),
    #[error("literal {0} out of range for {1} variables")]
    OutOfRange(i32, usize),
}

/// Flip a point to its negation's point.
#[inline]
pub fn neg_point(p: usize, n: usize) -> usize {
    if p < n {
        p + n
    } else {
        p - n
    }
}

/// Dense image table over the 2n literal points. Composition is left to right:
/// `a.then(&b)` maps x to (x^a)^b.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm {
    img: Vec<u32>,
}

impl Perm {
    pub fn identity(n: usize) -> Self {
        Perm { img: (0..2 * n as u32).collect() }
    }

    /// Build from an image table, checking bijectivity and sign-respect.
    pub fn from_images(img: Vec<u32>) -> Result<Self, PermError> {
        let m = img.len();
        assert!(m.is_multiple_of(2), "odd point count");
        let n = m / 2;
        let mut seen = vec![false; m];
        for &y in &img {
            let y = y as usize;
            if y >= m {
                return Err(PermError::OutOfRange(Lit::from_point(y % m, n).dimacs(), n));
            }
            if seen[y] {
                return Err(PermError::NotBijective(Lit::from_point(y, n).dimacs()));
            }
            seen[y] = true;
        }
        for x in 0..m {
            let forced = neg_point(img[x] as usize, n);
            let given = img[neg_point(x, n)] as usize;
            if forced != given {
                return Err(PermError::WnConflict {
                    lit: Lit::from_point(neg_point(x, n), n).dimacs(),
                    forced: Lit::from_point(forced, n).dimacs(),
                    given: Lit::from_point(given, n).dimacs(),
                });
            }
        }
        Ok(Perm { img })
    }

    /// Build from images of the positive literals only; negatives follow.
    pub fn from_positive_images(n: usize, pos: &[Lit]) -> Result<Self, PermError> {
        assert_eq!(pos.len(), n);
        let mut img = vec![0u32; 2 * n];
        for (v, &l) in pos.iter().enumerate() {
            if l.var() > n {
                return Err(PermError::OutOfRange(l.dimacs(), n));
            }
            img[v] = l.point(n) as u32;
            img[v + n] = (-l).point(n) as u32;
        }
        Perm::from_images(img)
    }

    /// Variable-level cycles (each entry a positive or negative literal), completed to W_n.
    pub fn from_cycles(n: usize, cycles: &[Vec<i32>]) -> Result<Self, PermError> {
        let mut explicit: Vec<Option<usize>> = vec![None; 2 * n];
        let mut mentioned = vec![false; 2 * n];
        for cyc in cycles {
            let mut pts = Vec::with_capacity(cyc.len());
            for &x in cyc {
                let l = Lit::new(x).map_err(|_| PermError::Parse { col: 0, msg: "0 is not a literal".into() })?;
                if l.var() > n {
                    return Err(PermError::OutOfRange(x, n));
                }
                let p = l.point(n);
                if mentioned[p] {
                    return Err(PermError::NotBijective(x));
                }
                mentioned[p] = true;
                pts.push(p);
            }
            for (i, &p) in pts.iter().enumerate() {
                explicit[p] = Some(pts[(i + 1) % pts.len()]);
            }
        }
        let mut img: Vec<Option<usize>> = explicit.clone();
        for x in 0..2 * n {
            if let Some(y) = explicit[x] {
                let nx = neg_point(x, n);
                let ny = neg_point(y, n);
                match explicit[nx] {
                    Some(z) if z != ny => {
                        return Err(PermError::WnConflict {
                            lit: Lit::from_point(nx, n).dimacs(),
                            forced: Lit::from_point(ny, n).dimacs(),
                            given: Lit::from_point(z, n).dimacs(),
                        })
                    }
                    _ => img[nx] = Some(ny),
                }
            }
        }
        let img: Vec<u32> = img.iter().enumerate().map(|(x, y)| y.unwrap_or(x) as u32).collect();
        Perm::from_images(img)
    }

    /// Parse cycle notation such as `(1 3 4)(2 5)`; `()` is the identity.
    pub fn parse(text: &str, n: usize) -> Result<Self, PermError> {
        let mut cycles: Vec<Vec<i32>> = Vec::new();
        let mut cur: Option<Vec<i32>> = None;
        let mut chars = text.char_indices().peekable();
        let mut any = false;
        while let Some(&(col, ch)) = chars.peek() {
            match ch {
                '(' => {
                    if cur.is_some() {
                        return Err(PermError::Parse { col: col + 1, msg: "nested '('".into() });
                    }
                    cur = Some(Vec::new());
                    chars.next();
                }
                ')' => {
                    let c = cur.take().ok_or(PermError::Parse { col: col + 1, msg: "unmatched ')'".into() })?;
                    if !c.is_empty() {
                        cycles.push(c);
                    }
                    any = true;
                    chars.next();
                }
                c if c.is_whitespace() || c == ',' => {
                    chars.next();
                }
                c if c == '-' || c == '+' || c.is_ascii_digit() => {
                    let start = col;
                    let mut s = String::new();
                    while let Some(&(_, d)) = chars.peek() {
                        if d == '-' || d == '+' || d.is_ascii_digit() {
                            s.push(d);
                            chars.next();
                        } else {
                            break;
                        }
                    }
                    let v: i32 = s
                        .parse()
                        .map_err(|_| PermError::Parse { col: start + 1, msg: format!("bad integer '{s}'") })?;
                    if v == 0 {
                        return Err(PermError::Parse { col: start + 1, msg: "0 is not a literal".into() });
                    }
                    match cur.as_mut() {
                        Some(c) => c.push(v),
                        None => return Err(PermError::Parse { col: start + 1, msg: "integer outside a cycle".into() }),
                    }
                }
                other => return Err(PermError::Parse { col: col + 1, msg: format!("unexpected character '{other}'") }),
            }
        }
        if cur.is_some() {
            return Err(PermError::Parse { col: text.len(), msg: "unterminated cycle".into() });
        }
        if !any {
            return Err(PermError::Parse { col: 1, msg: "expected at least one cycle".into() });
        }
        Perm::from_cycles(n, &cycles)
    }

    pub fn num_vars(&self) -> usize {
        self.img.len() / 2
    }

    pub fn degree(&self) -> usize {
        self.img.len()
    }

    pub fn images(&self) -> &[u32] {
        &self.img
    }

    #[inline]
    pub fn apply_point(&self, p: usize) -> usize {
        self.img[p] as usize
    }

    pub fn apply_lit(&self, l: Lit) -> Lit {
        let n = self.num_vars();
        Lit::from_point(self.apply_point(l.point(n)), n)
    }

    /// c^g; W_n preserves length and consistency so the result is a clause.
    pub fn apply_clause(&self, c: &Clause) -> Clause {
        Clause::new(c.iter().map(|l| self.apply_lit(l))).expect("sign-respecting image of a clause")
    }

    /// x maps to (x^self)^g.
    pub fn then(&self, g: &Perm) -> Perm {
        debug_assert_eq!(self.img.len(), g.img.len());
        Perm { img: self.img.iter().map(|&y| g.img[y as usize]).collect() }
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0u32; self.img.len()];
        for (x, &y) in self.img.iter().enumerate() {
            inv[y as usize] = x as u32;
        }
        Perm { img: inv }
    }

    pub fn pow(&self, k: usize) -> Perm {
        let mut r = Perm::identity(self.num_vars());
        for _ in 0..k {
            r = r.then(self);
        }
        r
    }

    pub fn is_identity(&self) -> bool {
        self.img.iter().enumerate().all(|(x, &y)| x == y as usize)
    }

    pub fn moved_points(&self) -> impl Iterator<Item = usize> + '_ {
        self.img.iter().enumerate().filter(|(x, &y)| *x != y as usize).map(|(x, _)| x)
    }

    /// Disjoint cycles over points, each starting at its smallest point, sorted.
    pub fn point_cycles(&self) -> Vec<Vec<usize>> {
        let m = self.img.len();
        let mut seen = vec![false; m];
        let mut out = Vec::new();
        for s in 0..m {
            if seen[s] || self.img[s] as usize == s {
                continue;
            }
            let mut cyc = vec![s];
            seen[s] = true;
            let mut x = self.img[s] as usize;
            while x != s {
                seen[x] = true;
                cyc.push(x);
                x = self.img[x] as usize;
            }
            out.push(cyc);
        }
        out
    }

    /// Canonical cycles over literals. Of each sign-dual pair of cycles only
    /// the one holding the smaller point is kept.
    pub fn cycles(&self) -> Vec<Vec<Lit>> {
        let n = self.num_vars();
        let mut printed = vec![false; 2 * n];
        let mut out = Vec::new();
        for cyc in self.point_cycles() {
            if printed[cyc[0]] {
                continue;
            }
            for &p in &cyc {
                printed[p] = true;
                printed[neg_point(p, n)] = true;
            }
            out.push(cyc.iter().map(|&p| Lit::from_point(p, n)).collect());
        }
        out
    }

    /// Total length of the canonical cycles.
    pub fn size(&self) -> usize {
        self.cycles().iter().map(Vec::len).sum()
    }

    pub fn format_cycles(&self) -> String {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return "()".to_string();
        }
        cycles.iter().map(|c| format!("({})", c.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(" "))).collect()
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.format_cycles())
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.format_cycles())
    }
}
