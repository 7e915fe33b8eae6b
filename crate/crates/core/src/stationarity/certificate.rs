//! Contraction certificates and the condition verdict map.

use std::fmt;

use nalgebra::DMatrix;

use crate::linalg::{self, PowerEstimate};
use crate::models::ModelSpec;
use crate::noise::CovariateSpec;
use crate::util::fmt_num;

/// Matrices, spectral radii and contraction constants of one model.
///
/// Models with a matrix bound fill `a_matrices` and everything derived from
/// the companion matrix; finite-alphabet models set `m` and `kappa` directly.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractionCertificate {
    pub family: String,
    pub p: f64,
    pub o: f64,
    pub a_matrices: Vec<DMatrix<f64>>,
    pub companion: Option<DMatrix<f64>>,
    pub rho_sum: Option<f64>,
    pub rho_b: Option<f64>,
    pub rho_b_power: Option<PowerEstimate>,
    /// Eigenvalues of `ΣA_i`, by decreasing modulus.
    pub sum_eigenvalues: Vec<(f64, f64)>,
    pub m: Option<usize>,
    pub kappa: Option<f64>,
    /// One-step bound `L`, with `L^p = |𝟙'B|_∞`.
    pub lipschitz: Option<f64>,
    pub scalars: Vec<(String, f64)>,
}

impl ContractionCertificate {
    pub fn empty(family: &str, p: f64, o: f64) -> Self {
        Self {
            family: family.to_string(),
            p,
            o,
            a_matrices: Vec::new(),
            companion: None,
            rho_sum: None,
            rho_b: None,
            rho_b_power: None,
            sum_eigenvalues: Vec::new(),
            m: None,
            kappa: None,
            lipschitz: None,
            scalars: Vec::new(),
        }
    }

    pub fn from_matrices(
        family: &str,
        p: f64,
        o: f64,
        mats: Vec<DMatrix<f64>>,
        scalars: Vec<(String, f64)>,
    ) -> Self {
        let mut c = Self::empty(family, p, o);
        c.scalars = scalars;
        if mats.is_empty() {
            return c;
        }
        let sum = linalg::sum_blocks(&mats);
        let b = linalg::companion(&mats);
        c.rho_sum = Some(linalg::spectral_radius_eigen(&sum));
        c.sum_eigenvalues = linalg::eigenvalues(&sum);
        c.rho_b = Some(linalg::spectral_radius_eigen(&b));
        c.rho_b_power = Some(linalg::spectral_radius_power(&b));
        c.lipschitz = Some(linalg::max_col_sum(&b).powf(1.0 / p));
        if let Some((m, top)) = linalg::contraction_lag(&b) {
            c.m = Some(m);
            c.kappa = Some(top.powf(1.0 / p));
        }
        c.companion = Some(b);
        c.a_matrices = mats;
        c
    }

    pub fn with_contraction(mut self, m: usize, kappa: f64) -> Self {
        self.m = Some(m);
        self.kappa = Some(kappa);
        self
    }

    /// Geometric memory rate `κ^{1/m}`.
    pub fn rate(&self) -> Option<f64> {
        match (self.m, self.kappa) {
            (Some(m), Some(k)) if k < 1.0 => Some(k.powf(1.0 / m as f64)),
            _ => None,
        }
    }

    pub fn scalar(&self, name: &str) -> Option<f64> {
        self.scalars.iter().find(|(n, _)| n == name).map(|(_, v)| *v)
    }
}

impl fmt::Display for ContractionCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "family: {}", self.family)?;
        writeln!(f, "p: {}", fmt_num(self.p))?;
        writeln!(f, "o: {}", fmt_num(self.o))?;
        let mat = |f: &mut fmt::Formatter<'_>, name: &str, a: &DMatrix<f64>| -> fmt::Result {
            writeln!(f, "{name}:")?;
            for r in 0..a.nrows() {
                let row: Vec<String> = (0..a.ncols()).map(|c| fmt_num(a[(r, c)])).collect();
                writeln!(f, "  [{}]", row.join(", "))?;
            }
            Ok(())
        };
        for (i, a) in self.a_matrices.iter().enumerate() {
            mat(f, &format!("A_{}", i + 1), a)?;
        }
        if let Some(b) = &self.companion {
            mat(f, "B", b)?;
        }
        if !self.sum_eigenvalues.is_empty() {
            let ev: Vec<String> = self
                .sum_eigenvalues
                .iter()
                .map(|(re, im)| {
                    if *im == 0.0 {
                        fmt_num(*re)
                    } else {
                        format!("{}{:+}i", fmt_num(*re), fmt_num(*im))
                    }
                })
                .collect();
            writeln!(f, "eigenvalues(sum A): {}", ev.join(", "))?;
        }
        let opt = |f: &mut fmt::Formatter<'_>, name: &str, v: Option<f64>| -> fmt::Result {
            match v {
                Some(x) => writeln!(f, "{name}: {}", fmt_num(x)),
                None => Ok(()),
            }
        };
        opt(f, "rho_sum", self.rho_sum)?;
        opt(f, "rho_B", self.rho_b)?;
        if let Some(p) = &self.rho_b_power {
            writeln!(
                f,
                "rho_B (power): {} in [{}, {}]",
                fmt_num(p.rho),
                fmt_num(p.lower),
                fmt_num(p.upper)
            )?;
        }
        match self.m {
            Some(m) => writeln!(f, "m: {m}")?,
            None if self.a_matrices.is_empty() => {}
            None => writeln!(f, "m: none (no power of B below one up to the lag cap)")?,
        }
        opt(f, "kappa", self.kappa)?;
        opt(f, "L", self.lipschitz)?;
        for (n, v) in &self.scalars {
            writeln!(f, "{n}: {}", fmt_num(*v))?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Holds(String),
    Fails(String),
    Undecidable(String),
}

impl Verdict {
    pub fn from_bool(ok: bool, detail: String) -> Self {
        if ok {
            Verdict::Holds(detail)
        } else {
            Verdict::Fails(detail)
        }
    }

    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds(_))
    }

    pub fn fails(&self) -> bool {
        matches!(self, Verdict::Fails(_))
    }
}

/// One entry of the verdict map. The governing entry decides the exit status.
#[derive(Debug, Clone, PartialEq)]
pub struct Condition {
    pub name: String,
    pub verdict: Verdict,
    pub governing: bool,
}

impl Condition {
    pub fn new(name: &str, verdict: Verdict) -> Self {
        Self { name: name.to_string(), verdict, governing: false }
    }

    pub fn governing(name: &str, verdict: Verdict) -> Self {
        Self { name: name.to_string(), verdict, governing: true }
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (word, detail) = match &self.verdict {
            Verdict::Holds(d) => ("holds", d),
            Verdict::Fails(d) => ("fails", d),
            Verdict::Undecidable(d) => ("undecidable", d),
        };
        if detail.is_empty() {
            write!(f, "{}: {word}", self.name)
        } else {
            write!(f, "{}: {word} ({detail})", self.name)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub certificate: ContractionCertificate,
    pub conditions: Vec<Condition>,
}

impl CheckReport {
    pub fn governing(&self) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.governing)
    }

    /// True unless the governing condition fails.
    pub fn governing_holds(&self) -> bool {
        self.governing().map_or(false, |c| c.verdict.holds())
    }

    pub fn get(&self, name: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.name == name)
    }
}

/// Certificate and verdict map of a validated model.
pub fn check_conditions(spec: &ModelSpec, cov: &CovariateSpec) -> CheckReport {
    CheckReport {
        certificate: spec.contraction_metadata(cov),
        conditions: spec.conditions(cov),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_one_block() {
        let a = DMatrix::from_row_slice(2, 2, &[0.3, 0.5, 0.3, 0.5]);
        let c = ContractionCertificate::from_matrices("t", 1.0, 1.0, vec![a], vec![]);
        assert!((c.rho_sum.unwrap() - 0.8).abs() < 1e-12);
        assert!((c.rho_b.unwrap() - 0.8).abs() < 1e-12);
        // column sums (0.6, 1) reach below one only at B^2 = 0.8 B
        assert_eq!(c.m, Some(2));
        assert!((c.kappa.unwrap() - 0.8).abs() < 1e-15);
        assert!((c.rate().unwrap() - 0.8f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn condition_display() {
        let c = Condition::governing("PA1", Verdict::Fails("gamma=1.1".into()));
        assert_eq!(c.to_string(), "PA1: fails (gamma=1.1)");
    }
}
