//! Second-order cone subproblem representation and solver backend.
//!
//! Problems are stated as
//!   minimize    1/2 x' diag(quad_diag) x + lin_cost' x
//!   subject to  zero_rows       == 0
//!               nonneg_rows     >= 0
//!               each soc block  in a second-order cone (first row is the
//!               cone's scalar bound)
//! where every row is an affine expression of the variables. The backend is
//! the Clarabel interior-point solver; the instance type keeps the backend
//! swappable and serializes to JSON for offline cross-checking.

use clarabel::algebra::CscMatrix;
use clarabel::solver::{
    DefaultSettings, DefaultSolver, IPSolver, SolverStatus, SupportedConeT,
};
use serde::{Deserialize, Serialize};

use crate::error::Result;

/// value = constant + sum of coeff * x[var].
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct AffineExpr {
    pub terms: Vec<(usize, f64)>,
    pub constant: f64,
}

impl AffineExpr {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(i, c)| c * x[i]).sum::<f64>()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SocpInstance {
    pub num_vars: usize,
    pub quad_diag: Vec<f64>,
    pub lin_cost: Vec<f64>,
    pub zero_rows: Vec<AffineExpr>,
    pub nonneg_rows: Vec<AffineExpr>,
    pub soc_blocks: Vec<Vec<AffineExpr>>,
}

impl SocpInstance {
    pub fn new(num_vars: usize) -> Self {
        Self {
            num_vars,
            quad_diag: vec![0.0; num_vars],
            lin_cost: vec![0.0; num_vars],
            zero_rows: Vec::new(),
            nonneg_rows: Vec::new(),
            soc_blocks: Vec::new(),
        }
    }

    pub fn dump_json(&self, path: &std::path::Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    /// Worst constraint violation of a candidate point, for validation.
    pub fn max_residual(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for row in &self.zero_rows {
            worst = worst.max(row.eval(x).abs());
        }
        for row in &self.nonneg_rows {
            worst = worst.max(-row.eval(x));
        }
        for block in &self.soc_blocks {
            let head = block[0].eval(x);
            let tail: f64 = block[1..].iter().map(|r| r.eval(x).powi(2)).sum::<f64>().sqrt();
            worst = worst.max(tail - head);
        }
        worst
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    NumericalFailure,
}

#[derive(Debug, Clone)]
pub struct SocpSolution {
    pub status: SolveStatus,
    pub x: Vec<f64>,
    pub objective: f64,
}

/// Assemble the Ax + s = b data in clarabel's CSC layout. Cone rows are
/// emitted in order: zero, nonnegative, then each SOC block.
fn assemble(
    inst: &SocpInstance,
) -> (CscMatrix<f64>, Vec<f64>, Vec<SupportedConeT<f64>>) {
    let rows: Vec<&AffineExpr> = inst
        .zero_rows
        .iter()
        .chain(inst.nonneg_rows.iter())
        .chain(inst.soc_blocks.iter().flatten())
        .collect();
    let m = rows.len();
    let n = inst.num_vars;

    // s = b - Ax must equal constant + coeffs.x, so A = -coeffs, b = constant.
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    let mut b = Vec::with_capacity(m);
    for (r, row) in rows.iter().enumerate() {
        b.push(row.constant);
        for &(var, coeff) in &row.terms {
            cols[var].push((r, -coeff));
        }
    }
    let mut colptr = Vec::with_capacity(n + 1);
    let mut rowval = Vec::new();
    let mut nzval = Vec::new();
    colptr.push(0);
    for col in &mut cols {
        col.sort_by_key(|&(r, _)| r);
        for &(r, v) in col.iter() {
            rowval.push(r);
            nzval.push(v);
        }
        colptr.push(rowval.len());
    }
    let a = CscMatrix::new(m, n, colptr, rowval, nzval);

    let mut cones = Vec::new();
    if !inst.zero_rows.is_empty() {
        cones.push(SupportedConeT::ZeroConeT(inst.zero_rows.len()));
    }
    if !inst.nonneg_rows.is_empty() {
        cones.push(SupportedConeT::NonnegativeConeT(inst.nonneg_rows.len()));
    }
    for block in &inst.soc_blocks {
        cones.push(SupportedConeT::SecondOrderConeT(block.len()));
    }
    (a, b, cones)
}

/// Solve an instance. Numerical trouble is reported in the status, never as
/// a panic or a silent bad answer.
pub fn solve_subproblem(inst: &SocpInstance) -> SocpSolution {
    let n = inst.num_vars;
    let p = CscMatrix::new(
        n,
        n,
        (0..=n).collect(),
        (0..n).collect(),
        inst.quad_diag.clone(),
    );
    let (a, b, cones) = assemble(inst);

    // Tight tolerances: transmit powers are ~1e-7 W at realistic channel
    // scales, so the default absolute gap would swamp the objective.
    let settings = DefaultSettings {
        verbose: false,
        tol_gap_abs: 1e-14,
        tol_gap_rel: 1e-10,
        tol_feas: 1e-10,
        max_iter: 200,
        ..DefaultSettings::default()
    };

    let solver = DefaultSolver::new(&p, &inst.lin_cost, &a, &b, &cones, settings);
    let mut solver = match solver {
        Ok(s) => s,
        Err(_) => {
            return SocpSolution {
                status: SolveStatus::NumericalFailure,
                x: vec![0.0; n],
                objective: f64::NAN,
            }
        }
    };
    solver.solve();

    let status = match solver.solution.status {
        SolverStatus::Solved | SolverStatus::AlmostSolved => SolveStatus::Optimal,
        SolverStatus::PrimalInfeasible | SolverStatus::AlmostPrimalInfeasible => {
            SolveStatus::Infeasible
        }
        _ => SolveStatus::NumericalFailure,
    };
    let x = solver.solution.x.clone();
    let objective = inst
        .quad_diag
        .iter()
        .zip(&x)
        .map(|(&q, &xi)| 0.5 * q * xi * xi)
        .sum::<f64>()
        + inst.lin_cost.iter().zip(&x).map(|(&c, &xi)| c * xi).sum::<f64>();

    SocpSolution { status, x, objective }
}
