//! Reweighted atomic-norm denoising by ADMM.
//!
//! The program solved in each reweighting round is
//!
//! ```text
//! minimise   ‖r_Ω − z_Ω‖² + λ (Tr(W T(u)) + t)
//! subject to B(u, r, t) = [T(u) r; r* t] ⪰ 0
//! ```
//!
//! split as `B = Z`, `Z ⪰ 0` with multiplier `Λ` and penalty `ρ`. One sweep
//! minimises the augmented Lagrangian exactly over `(t, u, r)`, projects
//! `B − Λ/ρ` onto the PSD cone to get `Z`, and takes a dual ascent step.
//! Round one uses `W = I`; later rounds use `W = (T(u_prev)₊ + εI)⁻¹`.

use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::linalg::{psd_project, vec_norm, CMatrix, C64, ZERO};
use crate::model::{ApertureMask, DataMatrix};
use crate::toeplitz::{adjoint_unchecked, build_unchecked, weight_matrix_with_rule, EpsilonRule, ToeplitzParam};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub lambda: f64,
    pub rho: f64,
    pub max_iters: usize,
    /// Defaults to `1e-6·√(NM)` when unset.
    pub tol_primal: Option<f64>,
    pub tol_dual: Option<f64>,
    pub reweight_rounds: usize,
    pub epsilon_rule: EpsilonRule,
    pub weighting_enabled: bool,
    /// Rescale each reweighting matrix to `Tr(W) = NM`.
    pub normalize_weight: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            rho: 1.0,
            max_iters: 1000,
            tol_primal: None,
            tol_dual: None,
            reweight_rounds: 3,
            epsilon_rule: EpsilonRule::default(),
            weighting_enabled: true,
            normalize_weight: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.lambda) {
            return param(format!("lambda must be positive, got {}", self.lambda));
        }
        if !positive(self.rho) {
            return param(format!("rho must be positive, got {}", self.rho));
        }
        if self.max_iters == 0 {
            return param("max_iters must be at least 1");
        }
        if self.reweight_rounds == 0 {
            return param("reweight_rounds must be at least 1");
        }
        for tol in [self.tol_primal, self.tol_dual].into_iter().flatten() {
            if !positive(tol) {
                return param(format!("tolerances must be positive, got {tol}"));
            }
        }
        self.epsilon_rule.validate()
    }

    pub fn tolerances(&self, nm: usize) -> (f64, f64) {
        let default = 1e-6 * (nm as f64).sqrt();
        (self.tol_primal.unwrap_or(default), self.tol_dual.unwrap_or(default))
    }
}

/// Full ADMM iterate.
#[derive(Clone, Debug)]
pub struct SolverState {
    pub t: f64,
    pub u: ToeplitzParam,
    pub r: Vec<C64>,
    pub z: CMatrix,
    pub lambda: CMatrix,
    pub iteration: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
}

impl SolverState {
    /// `Z = Λ = 0`, `t = 0`, `u = 0`, `r = z` on the mask and zero elsewhere.
    pub fn initial(z_obs: &DataMatrix, mask: &ApertureMask) -> Result<Self> {
        mask.check_len(z_obs.nm())?;
        let (n, m) = (z_obs.n_angles(), z_obs.n_freqs());
        let nm = n * m;
        Ok(Self {
            t: 0.0,
            u: ToeplitzParam::zeros(n, m),
            r: z_obs.masked(mask)?.as_vec().to_vec(),
            z: CMatrix::zeros(nm + 1, nm + 1),
            lambda: CMatrix::zeros(nm + 1, nm + 1),
            iteration: 0,
            primal_residual: f64::INFINITY,
            dual_residual: f64::INFINITY,
        })
    }

    pub fn bordered(&self) -> CMatrix {
        bordered(&self.u, &self.r, self.t)
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite()
            && self.r.iter().all(|z| z.re.is_finite() && z.im.is_finite())
            && self.z.is_finite()
            && self.lambda.is_finite()
    }
}

/// `[T(u) r; r* t]`.
pub fn bordered(u: &ToeplitzParam, r: &[C64], t: f64) -> CMatrix {
    let nm = u.nm();
    assert_eq!(r.len(), nm);
    let t_u = build_unchecked(u);
    let mut b = CMatrix::zeros(nm + 1, nm + 1);
    b.set_block(0, 0, &t_u);
    for (i, &ri) in r.iter().enumerate() {
        b[(i, nm)] = ri;
        b[(nm, i)] = ri.conj();
    }
    b[(nm, nm)] = C64::new(t, 0.0);
    b
}

/// Value of the round objective at `(u, r, t)` for weight `W`, where
/// `w_adj = T*(W)`.
pub fn objective(
    u: &ToeplitzParam,
    r: &[C64],
    t: f64,
    z_obs: &DataMatrix,
    mask: &ApertureMask,
    w_adj: &ToeplitzParam,
    lambda: f64,
) -> f64 {
    let fit: f64 = mask.observed().iter().map(|&i| (r[i] - z_obs.as_vec()[i]).norm_sqr()).sum();
    // Tr(W T(u)) = ⟨u, T*(W)⟩_w for Hermitian W.
    fit + lambda * (u.weighted_inner(w_adj).re + t)
}

/// Objective values bracketing one reweighting round.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Checkpoint {
    pub round: usize,
    pub start: f64,
    pub end: f64,
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub n: usize,
    pub m: usize,
    pub r_hat: Vec<C64>,
    pub u_hat: ToeplitzParam,
    pub t_hat: f64,
    pub primal_residuals: Vec<f64>,
    pub dual_residuals: Vec<f64>,
    pub objectives: Vec<f64>,
    pub iterations_run: usize,
    pub round_iterations: Vec<usize>,
    pub checkpoints: Vec<Checkpoint>,
    /// Whether the last round met both tolerances before `max_iters`.
    pub converged: bool,
    pub wall_time: f64,
}

impl SolveResult {
    pub fn data_matrix(&self) -> DataMatrix {
        DataMatrix::from_vec(self.n, self.m, self.r_hat.clone()).expect("solver output has N·M entries")
    }

    /// One row per iteration: `iteration,primal,dual,objective`.
    pub fn write_diagnostics(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "iteration,primal,dual,objective")?;
        for i in 0..self.iterations_run {
            writeln!(
                out,
                "{},{},{},{}",
                i + 1,
                self.primal_residuals[i],
                self.dual_residuals[i],
                self.objectives[i]
            )?;
        }
        Ok(())
    }
}

/// `λ = calibration · σ_n · √(NM · ln NM)`.
pub fn select_lambda(sigma_n: f64, nm: usize, calibration: f64) -> f64 {
    assert!(sigma_n >= 0.0, "noise standard deviation must be non-negative");
    if nm <= 1 {
        return 0.0;
    }
    let nm = nm as f64;
    calibration * sigma_n * (nm * nm.ln()).sqrt()
}

pub fn solve(z_obs: &DataMatrix, mask: &ApertureMask, cfg: &SolverConfig) -> Result<SolveResult> {
    cfg.validate()?;
    let start = Instant::now();
    let (n, m) = (z_obs.n_angles(), z_obs.n_freqs());
    let nm = n * m;
    let (tol_p, tol_d) = cfg.tolerances(nm);
    let mut state = SolverState::initial(z_obs, mask)?;

    let mut primal = Vec::new();
    let mut dual = Vec::new();
    let mut objectives = Vec::new();
    let mut round_iterations = Vec::new();
    let mut checkpoints = Vec::new();
    let mut converged = false;

    for round in 0..cfg.reweight_rounds {
        let w = if round == 0 || !cfg.weighting_enabled {
            CMatrix::identity(nm)
        } else {
            let (w, _) = weight_matrix_with_rule(&state.u, &cfg.epsilon_rule)?;
            if cfg.normalize_weight {
                let tr = w.trace().re;
                w.scale(nm as f64 / tr)
            } else {
                w
            }
        };
        let w_adj = adjoint_unchecked(&w, n, m);
        // Round one starts from the feasible origin; later rounds from the
        // previous round's estimate.
        let start_obj = if round == 0 {
            objective(&ToeplitzParam::zeros(n, m), &vec![ZERO; nm], 0.0, z_obs, mask, &w_adj, cfg.lambda)
        } else {
            objective(&state.u, &state.r, state.t, z_obs, mask, &w_adj, cfg.lambda)
        };

        let mut iters = 0;
        converged = false;
        while iters < cfg.max_iters {
            state = step(&state, z_obs, mask, &w_adj, cfg.lambda, cfg.rho)?;
            iters += 1;
            primal.push(state.primal_residual);
            dual.push(state.dual_residual);
            objectives.push(objective(&state.u, &state.r, state.t, z_obs, mask, &w_adj, cfg.lambda));
            if state.primal_residual < tol_p && state.dual_residual < tol_d {
                converged = true;
                break;
            }
        }
        round_iterations.push(iters);
        checkpoints.push(Checkpoint { round, start: start_obj, end: *objectives.last().expect("at least one iteration") });
    }

    Ok(SolveResult {
        n,
        m,
        r_hat: state.r,
        u_hat: state.u,
        t_hat: state.t,
        iterations_run: primal.len(),
        primal_residuals: primal,
        dual_residuals: dual,
        objectives,
        round_iterations,
        checkpoints,
        converged,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// One ADMM sweep with weighting matrix `w` (`NM × NM`, Hermitian).
pub fn admm_iterate(
    state: &SolverState,
    z_obs: &DataMatrix,
    mask: &ApertureMask,
    w: &CMatrix,
    cfg: &SolverConfig,
) -> Result<SolverState> {
    cfg.validate()?;
    mask.check_len(z_obs.nm())?;
    let (n, m) = state.u.dims();
    if z_obs.n_angles() != n || z_obs.n_freqs() != m || w.rows() != n * m || w.cols() != n * m {
        return crate::error::dim("state, data and weight dimensions disagree");
    }
    step(state, z_obs, mask, &adjoint_unchecked(w, n, m), cfg.lambda, cfg.rho)
}

fn step(
    state: &SolverState,
    z_obs: &DataMatrix,
    mask: &ApertureMask,
    w_adj: &ToeplitzParam,
    lam: f64,
    rho: f64,
) -> Result<SolverState> {
    let (n, m) = state.u.dims();
    let nm = n * m;
    let zmat = &state.z;
    let lmat = &state.lambda;

    // t: scalar corner.
    let t = zmat[(nm, nm)].re + (lmat[(nm, nm)].re - lam) / rho;

    // u: structured projection of Z0 + Λ0/ρ, shifted by (λ/ρ) T*(W).
    let mut target = CMatrix::zeros(nm, nm);
    {
        let dst = target.as_mut_slice();
        for i in 0..nm {
            for j in 0..nm {
                dst[i * nm + j] = zmat[(i, j)] + lmat[(i, j)] / rho;
            }
        }
    }
    let mut u = adjoint_unchecked(&target, n, m);
    for (a, b) in u.lags_mut().iter_mut().zip(w_adj.as_slice()) {
        *a -= b * (lam / rho);
    }

    // r: exact minimiser, with the fidelity term only on observed entries.
    let observed = mask.indicator();
    let z_data = z_obs.as_vec();
    let r: Vec<C64> = (0..nm)
        .map(|i| {
            let z1 = zmat[(i, nm)];
            let l1 = lmat[(i, nm)];
            if observed[i] {
                (z_data[i] + l1 + z1 * rho) / (1.0 + rho)
            } else {
                z1 + l1 / rho
            }
        })
        .collect();

    let b = bordered(&u, &r, t);
    let mut shifted = &b - &lmat.scale(1.0 / rho);
    if !shifted.is_finite() {
        return Err(Error::Diverged { iteration: state.iteration + 1, reason: "non-finite iterate".into() });
    }
    shifted = shifted.hermitian_part();
    let z_new = psd_project(&shifted)?;

    let gap = &z_new - &b;
    let lambda_new = (lmat + &gap.scale(rho)).hermitian_part();
    let primal_residual = gap.frobenius_norm();
    let dual_residual = rho * (&z_new - zmat).frobenius_norm();
    if !primal_residual.is_finite() || !dual_residual.is_finite() {
        return Err(Error::Diverged { iteration: state.iteration + 1, reason: "non-finite residual".into() });
    }

    Ok(SolverState {
        t,
        u,
        r,
        z: z_new,
        lambda: lambda_new,
        iteration: state.iteration + 1,
        primal_residual,
        dual_residual,
    })
}

/// Relative data error `‖a − b‖ / ‖b‖`.
pub fn relative_error(estimate: &[C64], truth: &[C64]) -> f64 {
    let diff: Vec<C64> = estimate.iter().zip(truth).map(|(a, b)| a - b).collect();
    vec_norm(&diff) / vec_norm(truth)
}
