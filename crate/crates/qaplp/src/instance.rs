//! QAP instances, perfect matchings, the quadratic objective, and an exact
//! brute-force oracle.
//!
//! All indices are zero-based in code; rendered output (matchings, variable
//! names, file headers) is one-based.

use std::fmt;
use std::path::Path;

use itertools::Itertools;

use crate::rng::{Pcg64, RNG_ALGORITHM};
use crate::{Error, Result};

/// Default bound on `n` for full enumeration of the `n!` matchings.
pub const DEFAULT_ENUMERATION_LIMIT: usize = 9;

/// Operating-cost regime for generated instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CostMode {
    /// Operating costs all zero.
    NoOpcost,
    /// Operating costs drawn uniformly on `[0, 5000]`.
    WithOpcost,
}

impl fmt::Display for CostMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CostMode::NoOpcost => write!(f, "no-opcost"),
            CostMode::WithOpcost => write!(f, "with-opcost"),
        }
    }
}

impl std::str::FromStr for CostMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "no-opcost" => Ok(CostMode::NoOpcost),
            "with-opcost" => Ok(CostMode::WithOpcost),
            other => Err(Error::Parse(format!("unknown cost mode {other:?}"))),
        }
    }
}

/// A QAP instance: `n` facilities, `n` sites, traffic volumes `f`, site
/// distances `d`, and operating costs `o`, each an `n x n` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct QapInstance {
    n: usize,
    traffic: Vec<f64>,
    distance: Vec<f64>,
    opcost: Vec<f64>,
}

fn check_matrix(name: &str, n: usize, m: &[f64]) -> Result<()> {
    if m.len() != n * n {
        return Err(Error::InvalidInstance(format!(
            "{name} matrix has {} entries, expected {}",
            m.len(),
            n * n
        )));
    }
    for (k, &v) in m.iter().enumerate() {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::InvalidInstance(format!(
                "{name}[{}][{}] = {v} is not a finite nonnegative number",
                k / n,
                k % n
            )));
        }
    }
    Ok(())
}

impl QapInstance {
    /// Builds an instance from row-major `n x n` matrices.
    pub fn new(n: usize, traffic: Vec<f64>, distance: Vec<f64>, opcost: Vec<f64>) -> Result<Self> {
        if n < 1 {
            return Err(Error::InvalidInstance("n must be at least 1".into()));
        }
        check_matrix("traffic", n, &traffic)?;
        check_matrix("distance", n, &distance)?;
        check_matrix("opcost", n, &opcost)?;
        Ok(QapInstance {
            n,
            traffic,
            distance,
            opcost,
        })
    }

    /// Uniform instance: all traffic `f0`, all distances `d0`, zero
    /// operating costs. Every matching of such an instance has the same
    /// objective value, which makes the family useful for calibration.
    pub fn make_uniform(n: usize, f0: f64, d0: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInstance("uniform instance needs n >= 2".into()));
        }
        if !(f0.is_finite() && d0.is_finite() && f0 >= 0.0 && d0 >= 0.0) {
            return Err(Error::InvalidInstance("f0 and d0 must be finite and nonnegative".into()));
        }
        let mut traffic = vec![f0; n * n];
        let mut distance = vec![d0; n * n];
        for q in 0..n {
            traffic[q * n + q] = 0.0;
            distance[q * n + q] = 0.0;
        }
        QapInstance::new(n, traffic, distance, vec![0.0; n * n])
    }

    /// Seeded random instance. Traffic is uniform on `[10, 250]` and
    /// distances on `[1, 30]`, drawn independently per ordered pair unless
    /// `symmetric` is set; operating costs are zero or uniform on
    /// `[0, 5000]` depending on `mode`. Diagonals are forced to zero.
    pub fn generate_random(n: usize, mode: CostMode, seed: u64, symmetric: bool) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInstance("random instance needs n >= 2".into()));
        }
        let mut rng = Pcg64::seed_from_u64(seed);
        let mut traffic = vec![0.0; n * n];
        let mut distance = vec![0.0; n * n];
        let mut opcost = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                if symmetric && j < i {
                    traffic[i * n + j] = traffic[j * n + i];
                } else {
                    traffic[i * n + j] = rng.uniform_inclusive(10, 250) as f64;
                }
            }
        }
        for r in 0..n {
            for s in 0..n {
                if r == s {
                    continue;
                }
                if symmetric && s < r {
                    distance[r * n + s] = distance[s * n + r];
                } else {
                    distance[r * n + s] = rng.uniform_inclusive(1, 30) as f64;
                }
            }
        }
        if mode == CostMode::WithOpcost {
            for v in opcost.iter_mut() {
                *v = rng.uniform_inclusive(0, 5000) as f64;
            }
        }
        QapInstance::new(n, traffic, distance, opcost)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Traffic volume from facility `i` to facility `j`.
    pub fn f(&self, i: usize, j: usize) -> f64 {
        self.traffic[i * self.n + j]
    }

    /// Distance from site `r` to site `s`.
    pub fn d(&self, r: usize, s: usize) -> f64 {
        self.distance[r * self.n + s]
    }

    /// Operating cost of facility `i` at site `r`.
    pub fn o(&self, i: usize, r: usize) -> f64 {
        self.opcost[i * self.n + r]
    }

    fn check_index(&self, what: &str, v: usize) -> Result<()> {
        if v >= self.n {
            return Err(Error::IndexOutOfRange(format!("{what} index {v} >= n = {}", self.n)));
        }
        Ok(())
    }

    /// Material handling cost of placing facilities `i` and `j` at sites
    /// `r` and `s`: `f[i][j]*d[r][s] + f[j][i]*d[s][r]`.
    pub fn handling_cost(&self, i: usize, r: usize, j: usize, s: usize) -> Result<f64> {
        self.check_index("facility", i)?;
        self.check_index("facility", j)?;
        self.check_index("site", r)?;
        self.check_index("site", s)?;
        if i == j {
            return Err(Error::InvalidArgument(format!("handling cost needs distinct facilities, got i = j = {i}")));
        }
        if r == s {
            return Err(Error::InvalidArgument(format!("handling cost needs distinct sites, got r = s = {r}")));
        }
        Ok(self.f(i, j) * self.d(r, s) + self.f(j, i) * self.d(s, r))
    }

    /// Objective value of a matching: one handling term per unordered site
    /// pair plus the operating cost of every placement.
    pub fn evaluate(&self, m: &Matching) -> Result<f64> {
        if m.n() != self.n {
            return Err(Error::SizeMismatch(format!(
                "matching of size {} against instance of size {}",
                m.n(),
                self.n
            )));
        }
        let mut total = 0.0;
        for r in 0..self.n {
            total += self.o(m.facility_at(r), r);
            for s in (r + 1)..self.n {
                total += self.handling_cost(m.facility_at(r), r, m.facility_at(s), s)?;
            }
        }
        Ok(total)
    }

    /// Exact optimum by full enumeration of all `n!` matchings, with ties
    /// broken towards the lexicographically smallest assignment list.
    pub fn brute_force_optimum(&self) -> Result<(Matching, f64)> {
        self.brute_force_optimum_with_limit(DEFAULT_ENUMERATION_LIMIT)
    }

    pub fn brute_force_optimum_with_limit(&self, limit: usize) -> Result<(Matching, f64)> {
        if self.n > limit {
            return Err(Error::EnumerationLimit { n: self.n, limit });
        }
        let mut best: Option<(Matching, f64)> = None;
        for perm in (0..self.n).permutations(self.n) {
            let m = Matching::new(perm)?;
            let v = self.evaluate(&m)?;
            // permutations() yields lexicographic order, so strict
            // improvement keeps the lexicographically first minimizer.
            match &best {
                Some((_, bv)) if v >= *bv => {}
                _ => best = Some((m, v)),
            }
        }
        best.ok_or_else(|| Error::InvalidInstance("empty instance".into()))
    }

    /// Renders the three-block text format, optionally with `#` metadata
    /// comment lines.
    pub fn render(&self, header: &[(String, String)]) -> String {
        let mut out = String::new();
        if !header.is_empty() {
            out.push('#');
            for (k, v) in header {
                out.push_str(&format!(" {k}={v}"));
            }
            out.push('\n');
        }
        out.push_str(&format!("{}\n", self.n));
        for block in [&self.traffic, &self.distance, &self.opcost] {
            out.push('\n');
            for r in 0..self.n {
                let row: Vec<String> = (0..self.n).map(|c| fmt_num(block[r * self.n + c])).collect();
                out.push_str(&row.join(" "));
                out.push('\n');
            }
        }
        out
    }

    /// Parses the three-block format, or the two-matrix QAPLIB layout with
    /// operating costs defaulting to zero. Lines starting with `#` carry
    /// key=value metadata and are returned alongside the instance.
    pub fn parse(text: &str) -> Result<(Self, Vec<(String, String)>)> {
        let mut meta = Vec::new();
        let mut tokens: Vec<&str> = Vec::new();
        for line in text.lines() {
            let trimmed = line.trim();
            if let Some(rest) = trimmed.strip_prefix('#') {
                for kv in rest.split_whitespace() {
                    if let Some((k, v)) = kv.split_once('=') {
                        meta.push((k.to_string(), v.to_string()));
                    }
                }
                continue;
            }
            tokens.extend(trimmed.split_whitespace());
        }
        let mut it = tokens.iter();
        let n: usize = it
            .next()
            .ok_or_else(|| Error::Parse("empty instance file".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("bad n: {e}")))?;
        let rest: Vec<f64> = it
            .map(|t| t.parse::<f64>().map_err(|e| Error::Parse(format!("bad number {t:?}: {e}"))))
            .collect::<Result<_>>()?;
        let sq = n * n;
        let (traffic, distance, opcost) = if rest.len() == 3 * sq {
            (rest[..sq].to_vec(), rest[sq..2 * sq].to_vec(), rest[2 * sq..].to_vec())
        } else if rest.len() == 2 * sq {
            (rest[..sq].to_vec(), rest[sq..].to_vec(), vec![0.0; sq])
        } else {
            return Err(Error::Parse(format!(
                "expected {} or {} matrix entries for n={n}, found {}",
                3 * sq,
                2 * sq,
                rest.len()
            )));
        };
        Ok((QapInstance::new(n, traffic, distance, opcost)?, meta))
    }

    pub fn write_file<P: AsRef<Path>>(&self, path: P, header: &[(String, String)]) -> Result<()> {
        std::fs::write(path, self.render(header))?;
        Ok(())
    }

    pub fn read_file<P: AsRef<Path>>(path: P) -> Result<(Self, Vec<(String, String)>)> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }
}

/// Standard metadata header for a generated instance.
pub fn instance_header(name: &str, mode: CostMode, seed: u64, symmetric: bool) -> Vec<(String, String)> {
    vec![
        ("name".into(), name.into()),
        ("mode".into(), mode.to_string()),
        ("seed".into(), seed.to_string()),
        ("rng".into(), RNG_ALGORITHM.into()),
        ("symmetric".into(), symmetric.to_string()),
    ]
}

fn fmt_num(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

/// A perfect facility-to-site assignment: `assign[r]` is the facility
/// placed at site `r` (zero-based).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Matching {
    assign: Vec<usize>,
}

impl Matching {
    pub fn new(assign: Vec<usize>) -> Result<Self> {
        let n = assign.len();
        let mut seen = vec![false; n];
        for &f in &assign {
            if f >= n || seen[f] {
                return Err(Error::InvalidMatching(format!("{assign:?} is not a permutation of 0..{n}")));
            }
            seen[f] = true;
        }
        Ok(Matching { assign })
    }

    /// Identity matching: facility `r` at site `r`.
    pub fn identity(n: usize) -> Self {
        Matching {
            assign: (0..n).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.assign.len()
    }

    pub fn facility_at(&self, site: usize) -> usize {
        self.assign[site]
    }

    pub fn assign(&self) -> &[usize] {
        &self.assign
    }

    /// All `n!` matchings in lexicographic order of the assignment list.
    pub fn enumerate(n: usize) -> impl Iterator<Item = Matching> {
        (0..n).permutations(n).map(|p| Matching { assign: p })
    }
}

impl fmt::Display for Matching {
    /// One-based one-line form, e.g. `(3 1 4 2)`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, &v) in self.assign.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}", v + 1)?;
        }
        write!(f, ")")
    }
}
