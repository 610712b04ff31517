use std::fmt::Write as _;

use qdsm_core::conjugacy::{data_matrix, spectrum_invariant};
use qdsm_core::extremality::{choi_extremal_test, landau_streater_test, ExtremalDecomposition};
use qdsm_core::io::{classification_value, decomposition_value, real_list, verdict_value};
use qdsm_core::{classify, Channel, ExtremalityVerdict, Result, SpectralClassification, Tolerance};
use serde_json::{json, Value};

/// Everything `analyze` computes for one channel.
pub struct Report {
    pub dim: usize,
    pub index: usize,
    pub unital: bool,
    pub trace_preserving: bool,
    pub cp: ExtremalityVerdict,
    /// Only computed for trace-preserving channels.
    pub cp_phi: Option<ExtremalityVerdict>,
    pub spectral: Option<SpectralClassification>,
    pub data_spectrum: Vec<f64>,
    pub decomposition: Option<ExtremalDecomposition>,
}

impl Report {
    pub fn build(ch: &Channel, tol: &Tolerance) -> Result<Self> {
        let cp = choi_extremal_test(ch, tol)?;
        let (cp_phi, spectral) = if ch.is_trace_preserving() {
            (Some(landau_streater_test(ch, tol)?), Some(classify(ch, tol)?))
        } else {
            (None, None)
        };
        let data_spectrum = spectrum_invariant(&data_matrix(ch, None, tol)?, tol)?;
        Ok(Report {
            dim: ch.dim(),
            index: ch.numerical_index(),
            unital: ch.is_unital(),
            trace_preserving: ch.is_trace_preserving(),
            cp,
            cp_phi,
            spectral,
            data_spectrum,
            decomposition: None,
        })
    }

    /// A Choi-extremal verdict must never come with a non-extremal LS verdict.
    pub fn is_consistent(&self) -> bool {
        match &self.cp_phi {
            Some(ls) => !self.cp.extremal || ls.extremal,
            None => true,
        }
    }

    pub fn to_json(&self) -> Value {
        let mut v = json!({
            "channel": {
                "dim": self.dim,
                "index": self.index,
                "unital": self.unital,
                "trace_preserving": self.trace_preserving,
            },
            "extremality": {
                "cp": verdict_value(&self.cp),
                "cp_phi": self.cp_phi.as_ref().map(verdict_value),
            },
            "spectral": self.spectral.as_ref().map(|c| classification_value(c, None)),
            "data_spectrum": real_list(&self.data_spectrum),
            "consistent": self.is_consistent(),
        });
        if let Some(d) = &self.decomposition {
            v["decomposition"] = decomposition_value(d);
        }
        v
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let yes = |b: bool| if b { "yes" } else { "no" };
        let _ = writeln!(s, "dimension        {}", self.dim);
        let _ = writeln!(s, "numerical index  {}", self.index);
        let _ = writeln!(s, "unital           {}", yes(self.unital));
        let _ = writeln!(s, "trace preserving {}", yes(self.trace_preserving));
        let _ = writeln!(
            s,
            "CP-extremal      {} (rank {} of {})",
            yes(self.cp.extremal),
            self.cp.rank,
            self.index * self.index
        );
        match &self.cp_phi {
            Some(v) => {
                let _ = writeln!(
                    s,
                    "CP_phi-extremal  {} (rank {} of {})",
                    yes(v.extremal),
                    v.rank,
                    self.index * self.index
                );
            }
            None => {
                let _ = writeln!(s, "CP_phi-extremal  n/a (not trace preserving)");
            }
        }
        if let Some(cert) = self.cp.certificate.as_ref().or(self.cp_phi.as_ref().and_then(|v| v.certificate.as_ref())) {
            let _ = writeln!(s, "certificate ({:?}):", cert.kind);
            for i in 0..cert.lambda.nrows() {
                let row: Vec<String> = (0..cert.lambda.ncols())
                    .map(|j| {
                        let z = cert.lambda[(i, j)];
                        format!("{:+.6}{:+.6}i", z.re, z.im)
                    })
                    .collect();
                let _ = writeln!(s, "  [{}]", row.join(", "));
            }
        }
        if let Some(c) = &self.spectral {
            let _ = writeln!(s, "fixed-point dim  {}", c.fixed_dim);
            let _ = writeln!(s, "ergodic          {}", yes(c.ergodic));
            if let Some(p) = c.period {
                let _ = writeln!(s, "period           {p}");
            }
            let _ = writeln!(s, "strongly mixing  {}", yes(c.strongly_mixing));
        }
        let spectrum: Vec<String> = self.data_spectrum.iter().map(|x| format!("{x:.6}")).collect();
        let _ = writeln!(s, "data spectrum    [{}]", spectrum.join(", "));
        s
    }
}
