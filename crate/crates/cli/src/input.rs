//! Input file schemas and their conversion into library types.
//!
//! All files carry `schema_version` (currently 1) and a `kind` tag. Complex
//! scalars are always `[re, im]` pairs; matrices are row-major.

use std::path::Path;
use std::sync::Arc;

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Deserialize;

use arveson::{
    koszul_resolution_of_point, taylor_resolution_monomial, CMatrix, CommutingTuple, DASpace,
    DAVector, MoebiusMap, MultiIndex, MultiplierMatrix, QuotientModule, ResolutionSpec,
    ResolvedModule, TruncatedSeries,
};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

pub type Cx = [f64; 2];

pub fn cx(v: Cx) -> Complex64 {
    Complex64::new(v[0], v[1])
}

pub fn point(vs: &[Cx]) -> Vec<Complex64> {
    vs.iter().map(|v| cx(*v)).collect()
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum InputFile {
    Tuple(TupleFile),
    Automorphism(AutomorphismFile),
    Resolution(ResolutionFile),
    Compare(CompareFile),
    Submodule(SubmoduleFile),
}

impl InputFile {
    pub fn schema_version(&self) -> u32 {
        match self {
            InputFile::Tuple(f) => f.schema_version,
            InputFile::Automorphism(f) => f.schema_version,
            InputFile::Resolution(f) => f.schema_version,
            InputFile::Compare(f) => f.schema_version,
            InputFile::Submodule(f) => f.schema_version,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            InputFile::Tuple(_) => "tuple",
            InputFile::Automorphism(_) => "automorphism",
            InputFile::Resolution(_) => "resolution",
            InputFile::Compare(_) => "compare",
            InputFile::Submodule(_) => "submodule",
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TupleFile {
    pub schema_version: u32,
    pub d: usize,
    pub dim: usize,
    /// `d` matrices, each `dim x dim`, row-major complex entries.
    pub matrices: Vec<Vec<Vec<Cx>>>,
    /// Squared norms of the underlying basis vectors; omitted means
    /// orthonormal.
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
    /// Commutator tolerance override.
    #[serde(default)]
    pub tolerance: Option<f64>,
}

impl TupleFile {
    pub fn build(&self) -> Result<CommutingTuple, CliError> {
        if self.matrices.len() != self.d {
            return Err(CliError::input(format!(
                "expected {} matrices, found {}",
                self.d,
                self.matrices.len()
            )));
        }
        let mut matrices = Vec::with_capacity(self.d);
        for (which, rows) in self.matrices.iter().enumerate() {
            if rows.len() != self.dim || rows.iter().any(|r| r.len() != self.dim) {
                return Err(CliError::input(format!(
                    "matrix {which} is not {0}x{0}",
                    self.dim
                )));
            }
            let mut m = CMatrix::zeros(self.dim, self.dim);
            for (i, row) in rows.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    m[(i, j)] = cx(*v);
                }
            }
            matrices.push(m);
        }
        let weights = match &self.weights {
            Some(w) => {
                if w.len() != self.dim {
                    return Err(CliError::input("weight vector length mismatch".into()));
                }
                if w.iter().any(|&x| x <= 0.0) {
                    return Err(CliError::input("weights must be positive".into()));
                }
                Some(DVector::from_vec(w.clone()))
            }
            None => None,
        };
        let tol = self.tolerance.unwrap_or(arveson::tolerances::COMMUTATOR_TOL);
        CommutingTuple::with_tolerance(matrices, weights, tol).map_err(CliError::from)
    }
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum UnitarySpec {
    Named(String),
    Matrix(Vec<Vec<Cx>>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AutomorphismFile {
    pub schema_version: u32,
    pub d: usize,
    pub lambda: Vec<Cx>,
    #[serde(default)]
    pub unitary: Option<UnitarySpec>,
}

impl AutomorphismFile {
    pub fn build(&self) -> Result<MoebiusMap, CliError> {
        if self.lambda.len() != self.d {
            return Err(CliError::input("lambda length must equal d".into()));
        }
        let lambda = point(&self.lambda);
        let unitary = match &self.unitary {
            None => CMatrix::identity(self.d, self.d),
            Some(UnitarySpec::Named(name)) if name == "identity" => {
                CMatrix::identity(self.d, self.d)
            }
            Some(UnitarySpec::Named(name)) => {
                return Err(CliError::input(format!("unknown unitary name '{name}'")));
            }
            Some(UnitarySpec::Matrix(rows)) => {
                if rows.len() != self.d || rows.iter().any(|r| r.len() != self.d) {
                    return Err(CliError::input("unitary matrix shape mismatch".into()));
                }
                let mut m = CMatrix::zeros(self.d, self.d);
                for (i, row) in rows.iter().enumerate() {
                    for (j, v) in row.iter().enumerate() {
                        m[(i, j)] = cx(*v);
                    }
                }
                m
            }
        };
        MoebiusMap::new(lambda, unitary).map_err(CliError::from)
    }
}

/// A polynomial as a list of `{exp, coeff}` terms.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermRepr {
    pub exp: Vec<usize>,
    pub coeff: Cx,
}

fn series_from_terms(d: usize, cap: usize, terms: &[TermRepr]) -> Result<TruncatedSeries, CliError> {
    let mut s = TruncatedSeries::zero(d, cap);
    for t in terms {
        if t.exp.len() != d {
            return Err(CliError::input(format!(
                "term exponent {:?} does not have {} entries",
                t.exp, d
            )));
        }
        let alpha = MultiIndex::new(t.exp.clone());
        if alpha.degree() > cap {
            return Err(CliError::input(format!(
                "term degree {} exceeds the cap {cap}",
                alpha.degree()
            )));
        }
        let v = s.coeff(&alpha) + cx(t.coeff);
        s.set_coeff(alpha, v);
    }
    Ok(s)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapRepr {
    pub rows: usize,
    pub cols: usize,
    /// `rows x cols` nested array; each entry is a term list.
    pub entries: Vec<Vec<Vec<TermRepr>>>,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ResolutionSpecRepr {
    /// Koszul-type differentials of the point module at `mu`.
    KoszulPoint { mu: Vec<Cx> },
    /// Taylor complex of a monomial ideal.
    TaylorMonomial { generators: Vec<Vec<usize>> },
    /// Explicit polynomial matrices.
    Explicit {
        ranks: Vec<usize>,
        maps: Vec<MapRepr>,
        #[serde(default)]
        shifts: Option<Vec<Vec<usize>>>,
    },
}

impl ResolutionSpecRepr {
    pub fn build(&self, d: usize, cap: usize) -> Result<ResolutionSpec, CliError> {
        match self {
            ResolutionSpecRepr::KoszulPoint { mu } => {
                koszul_resolution_of_point(&point(mu), d, cap).map_err(CliError::from)
            }
            ResolutionSpecRepr::TaylorMonomial { generators } => {
                let gens: Vec<MultiIndex> = generators
                    .iter()
                    .map(|e| MultiIndex::new(e.clone()))
                    .collect();
                taylor_resolution_monomial(&gens, d, cap).map_err(CliError::from)
            }
            ResolutionSpecRepr::Explicit { ranks, maps, shifts } => {
                let mut built = Vec::with_capacity(maps.len());
                for m in maps {
                    if m.entries.len() != m.rows
                        || m.entries.iter().any(|r| r.len() != m.cols)
                    {
                        return Err(CliError::input("map entries shape mismatch".into()));
                    }
                    let mut flat = Vec::with_capacity(m.rows * m.cols);
                    for row in &m.entries {
                        for entry in row {
                            flat.push(series_from_terms(d, cap, entry)?);
                        }
                    }
                    built.push(
                        MultiplierMatrix::new(d, cap, m.rows, m.cols, flat)
                            .map_err(CliError::from)?,
                    );
                }
                ResolutionSpec::new(
                    d,
                    cap,
                    ranks.clone(),
                    built,
                    shifts.clone(),
                    "explicit resolution".into(),
                )
                .map_err(CliError::from)
            }
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResolutionFile {
    pub schema_version: u32,
    pub d: usize,
    pub cap: usize,
    pub resolution: ResolutionSpecRepr,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModuleRepr {
    /// The scalar module at `mu` (the zero tuple when `mu = 0`).
    Point { mu: Vec<Cx> },
    /// Quotient of the truncated space by monomial generators.
    Quotient { generators: Vec<Vec<usize>> },
    /// An explicit tuple.
    Tuple { tuple: TupleFile },
}

impl ModuleRepr {
    pub fn build(&self, d: usize, cap: usize) -> Result<ResolvedModule, CliError> {
        match self {
            ModuleRepr::Point { mu } => {
                let mu = point(mu);
                if mu.len() != d {
                    return Err(CliError::input("mu length must equal d".into()));
                }
                Ok(ResolvedModule::Tuple(
                    CommutingTuple::scalar(&mu).map_err(CliError::from)?,
                ))
            }
            ModuleRepr::Quotient { generators } => {
                let space = DASpace::new(d, cap).map_err(CliError::from)?;
                let vectors: Vec<DAVector> = generators
                    .iter()
                    .map(|e| {
                        DAVector::monomial(space.clone(), &MultiIndex::new(e.clone()))
                            .map_err(CliError::from)
                    })
                    .collect::<Result<_, _>>()?;
                Ok(ResolvedModule::Quotient(
                    QuotientModule::new(&space, &vectors).map_err(CliError::from)?,
                ))
            }
            ModuleRepr::Tuple { tuple } => Ok(ResolvedModule::Tuple(tuple.build()?)),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CompareFile {
    pub schema_version: u32,
    pub d: usize,
    pub cap: usize,
    pub module: ModuleRepr,
    pub resolution: ResolutionSpecRepr,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubmoduleFile {
    pub schema_version: u32,
    pub d: usize,
    pub cap: usize,
    /// Monomial generators; the submodule is the span of their truncated
    /// multiples.
    pub generators: Vec<Vec<usize>>,
}

impl SubmoduleFile {
    pub fn build(&self) -> Result<(Arc<DASpace>, Vec<DAVector>), CliError> {
        let space = DASpace::new(self.d, self.cap).map_err(CliError::from)?;
        let gens: Vec<MultiIndex> = self
            .generators
            .iter()
            .map(|e| MultiIndex::new(e.clone()))
            .collect();
        for g in &gens {
            if g.d() != self.d {
                return Err(CliError::input("generator arity mismatch".into()));
            }
        }
        let mut basis = Vec::new();
        for alpha in space.basis().iter() {
            if gens.iter().any(|g| alpha.divisible_by(g)) {
                basis.push(DAVector::monomial(space.clone(), alpha).map_err(CliError::from)?);
            }
        }
        Ok((space, basis))
    }
}

/// Parse an input file, checking the schema version.
pub fn load(path: &Path) -> Result<InputFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::input(format!("cannot read {}: {e}", path.display())))?;
    let parsed: InputFile = serde_json::from_str(&text).map_err(|e| {
        CliError::input(format!(
            "{}: parse error at line {}, column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })?;
    if parsed.schema_version() != SCHEMA_VERSION {
        return Err(CliError::input(format!(
            "{}: schema version {} does not match supported version {SCHEMA_VERSION}",
            path.display(),
            parsed.schema_version()
        )));
    }
    Ok(parsed)
}

/// Parse `re,im;re,im;..` into a point.
pub fn parse_point(text: &str, d: usize) -> Result<Vec<Complex64>, CliError> {
    let coords: Vec<&str> = text.split(';').collect();
    if coords.len() != d {
        return Err(CliError::input(format!(
            "point '{text}' has {} coordinates, expected {d}",
            coords.len()
        )));
    }
    let mut out = Vec::with_capacity(d);
    for c in coords {
        let parts: Vec<&str> = c.split(',').collect();
        if parts.len() != 2 {
            return Err(CliError::input(format!("coordinate '{c}' is not re,im")));
        }
        let re: f64 = parts[0]
            .trim()
            .parse()
            .map_err(|e| CliError::input(format!("bad real part '{}': {e}", parts[0])))?;
        let im: f64 = parts[1]
            .trim()
            .parse()
            .map_err(|e| CliError::input(format!("bad imaginary part '{}': {e}", parts[1])))?;
        out.push(Complex64::new(re, im));
    }
    Ok(out)
}
