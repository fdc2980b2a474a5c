use serde::Serialize;

use super::SolverConfig;
use crate::error::Error;

/// State at the start of one iteration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Record {
    pub iter: usize,
    pub obj_f: f64,
    pub obj_g: f64,
    pub grad_inf: f64,
    pub support: usize,
    pub wall_ns: u64,
    /// Certified inner suboptimality of the step that produced this iterate.
    pub eps_hat: Option<f64>,
    pub inner_iters: Option<usize>,
}

#[derive(Debug)]
pub struct Trace {
    pub records: Vec<Record>,
    pub config: SolverConfig,
    pub reference: Option<f64>,
    pub l1_smooth: f64,
    pub l2_smooth: f64,
    /// Every iterate, when the config asks for them.
    pub iterates: Vec<Vec<f64>>,
    pub final_alpha: Vec<f64>,
    /// Set when a step failed; the records up to the failure are kept.
    pub failure: Option<Error>,
}

impl Trace {
    pub(crate) fn new(config: SolverConfig, reference: Option<f64>, l1: f64, l2: f64) -> Self {
        Trace {
            records: Vec::new(),
            config,
            reference,
            l1_smooth: l1,
            l2_smooth: l2,
            iterates: Vec::new(),
            final_alpha: Vec::new(),
            failure: None,
        }
    }

    pub(crate) fn push(&mut self, rec: Record, alpha: &[f64]) {
        self.records.push(rec);
        if self.config.keep_iterates {
            self.iterates.push(alpha.to_vec());
        }
    }

    pub fn gaps(&self) -> Option<Vec<f64>> {
        let opt = self.reference?;
        Some(self.records.iter().map(|r| r.obj_g - opt).collect())
    }

    pub fn last(&self) -> &Record {
        self.records.last().expect("a trace always holds the initial record")
    }

    /// First iteration whose gap is at most `eps`.
    pub fn first_below(&self, eps: f64) -> Option<usize> {
        let opt = self.reference?;
        self.records.iter().find(|r| r.obj_g - opt <= eps).map(|r| r.iter)
    }

    /// CSV with header `iter,obj,gap,grad_inf,support,wall_ns`.
    /// `timing = false` writes zero wall times so output is reproducible.
    pub fn to_csv(&self, timing: bool) -> String {
        let mut s = String::from("iter,obj,gap,grad_inf,support,wall_ns\n");
        for r in &self.records {
            let gap = self
                .reference
                .map(|opt| (r.obj_g - opt).to_string())
                .unwrap_or_default();
            let wall = if timing { r.wall_ns } else { 0 };
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.iter, r.obj_g, gap, r.grad_inf, r.support, wall
            ));
        }
        s
    }
}
