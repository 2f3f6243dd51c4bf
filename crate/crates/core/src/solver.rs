use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{RbError, Result};
use crate::field::{RealField2D, SpectralField2D, SpectralVector2D, VectorField2D};
use crate::grid::Grid2D;
use crate::multiplier::{linear_propagator, op_l, MultiplierOp};
use crate::symbol::SymbolG;

pub const CFL_FLOOR: f64 = 1e-8;
pub const DT_MAX: f64 = 0.1;

/// Term switches for the linear/decoupled verification regimes. A healthy
/// production run keeps everything on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Hooks {
    pub advection: bool,
    /// d/dx1 of temperature forcing the vorticity
    pub buoyancy: bool,
    /// vertical velocity sourcing the temperature
    pub convection_source: bool,
    pub dissipation: bool,
}

impl Default for Hooks {
    fn default() -> Self {
        Self {
            advection: true,
            buoyancy: true,
            convection_source: true,
            dissipation: true,
        }
    }
}

/// Initial data: the classic cellular vortex, a seeded flat-spectrum band,
/// or spectral fields restored from a checkpoint.
#[derive(Debug, Clone)]
pub enum IcSpec {
    TaylorGreen {
        amplitude: f64,
        theta_amplitude: f64,
    },
    RandomBand {
        amplitude: f64,
        k_lo: f64,
        k_hi: f64,
    },
    Fields {
        omega: SpectralField2D,
        theta: SpectralField2D,
        t: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DtSpec {
    Fixed(f64),
    /// CFL-based step resolved once at t = 0 and then held fixed, so that
    /// diagnostic records stay uniformly spaced.
    Auto { c_cfl: f64 },
}

/// Spectral state (vorticity, temperature) at time t, band-limited to the
/// dealiased band with a pinned zero vorticity mean.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub omega: SpectralField2D,
    pub theta: SpectralField2D,
    pub t: f64,
}

/// Vorticity-temperature pseudo-spectral integrator. The dissipation
/// operator is diagonal in Fourier space and folded into the stepper as an
/// exact integrating factor, so only advection constrains the step size.
pub struct RbSolver {
    grid: Grid2D,
    symbol: SymbolG,
    hooks: Hooks,
    dealias: bool,
    l_op: MultiplierOp,
}

impl RbSolver {
    pub fn new(grid: Grid2D, symbol: SymbolG, hooks: Hooks, dealias: bool) -> Self {
        let l_op = op_l(&grid, &symbol);
        Self {
            grid,
            symbol,
            hooks,
            dealias,
            l_op,
        }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn symbol(&self) -> &SymbolG {
        &self.symbol
    }

    pub fn hooks(&self) -> Hooks {
        self.hooks
    }

    pub fn initial_state(&self, ic: &IcSpec, seed: u64) -> Result<SolverState> {
        let n = self.grid.n();
        let (mut omega, mut theta, t) = match ic {
            IcSpec::TaylorGreen {
                amplitude,
                theta_amplitude,
            } => {
                let (a, b) = (*amplitude, *theta_amplitude);
                let w = RealField2D::from_fn(n, self.grid.box_length(), |x1, x2| {
                    a * x1.sin() * x2.sin()
                });
                let th =
                    RealField2D::from_fn(n, self.grid.box_length(), |x1, _| b * x1.cos());
                (self.grid.forward(&w)?, self.grid.forward(&th)?, 0.0)
            }
            IcSpec::RandomBand {
                amplitude,
                k_lo,
                k_hi,
            } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let w = self.grid.random_band(*k_lo, *k_hi, *amplitude, &mut rng);
                let th = self.grid.random_band(*k_lo, *k_hi, *amplitude, &mut rng);
                (w, th, 0.0)
            }
            IcSpec::Fields { omega, theta, t } => {
                if omega.n() != n || theta.n() != n {
                    return Err(RbError::Config(format!(
                        "checkpoint fields are {}^2 but the grid is {}^2",
                        omega.n(),
                        n
                    )));
                }
                (omega.clone(), theta.clone(), *t)
            }
        };
        if self.dealias {
            self.grid.dealias_in_place(&mut omega);
            self.grid.dealias_in_place(&mut theta);
        }
        omega.coeffs[(0, 0)] = Complex64::new(0.0, 0.0);
        Ok(SolverState { omega, theta, t })
    }

    pub fn velocity(&self, state: &SolverState) -> Result<SpectralVector2D> {
        self.grid.biot_savart(&state.omega)
    }

    pub fn velocity_physical(&self, state: &SolverState) -> Result<VectorField2D> {
        let u = self.velocity(state)?;
        Ok(VectorField2D {
            x1: self.grid.inverse(&u.x1)?,
            x2: self.grid.inverse(&u.x2)?,
        })
    }

    /// Advective transport of a spectral scalar: dealiased F(u . grad f).
    pub fn advect(&self, u_phys: &VectorField2D, f: &SpectralField2D) -> Result<SpectralField2D> {
        let grad = self.grid.gradient(f);
        let fx = self.grid.inverse(&grad.x1)?;
        let fy = self.grid.inverse(&grad.x2)?;
        let mut prod = fx.values;
        prod.zip_mut_with(&u_phys.x1.values, |a, b| *a *= *b);
        let mut prod2 = fy.values;
        prod2.zip_mut_with(&u_phys.x2.values, |a, b| *a *= *b);
        prod.zip_mut_with(&prod2, |a, b| *a += *b);
        let spec = self.grid.forward(&RealField2D { values: prod })?;
        Ok(if self.dealias {
            self.grid.dealias(&spec)
        } else {
            spec
        })
    }

    /// Nonlinear/coupling part of the evolution (the stiff dissipation term
    /// is handled by the propagator, not here):
    /// d(omega) = -F(u . grad omega) + i k1 theta,
    /// d(theta) = -F(u . grad theta) + u2.
    pub fn nonlinear_rhs(
        &self,
        state: &SolverState,
    ) -> Result<(SpectralField2D, SpectralField2D)> {
        self.nonlinear_rhs_inner(state).map_err(|e| match e {
            // overflow inside transforms/products surfaces as blow-up
            RbError::NonFinite { .. }
            | RbError::SymmetryViolation { .. }
            | RbError::NonzeroMean { .. } => RbError::BlowUp { t: state.t },
            other => other,
        })
    }

    fn nonlinear_rhs_inner(
        &self,
        state: &SolverState,
    ) -> Result<(SpectralField2D, SpectralField2D)> {
        let n = self.grid.n();
        let mut d_omega = SpectralField2D::zeros(n);
        let mut d_theta = SpectralField2D::zeros(n);

        let u = self.velocity(state)?;
        if self.hooks.advection {
            let u_phys = VectorField2D {
                x1: self.grid.inverse(&u.x1)?,
                x2: self.grid.inverse(&u.x2)?,
            };
            let adv_w = self.advect(&u_phys, &state.omega)?;
            let adv_t = self.advect(&u_phys, &state.theta)?;
            d_omega.coeffs.zip_mut_with(&adv_w.coeffs, |a, b| *a -= *b);
            d_theta.coeffs.zip_mut_with(&adv_t.coeffs, |a, b| *a -= *b);
        }
        if self.hooks.buoyancy {
            let d1_theta = self.grid.gradient(&state.theta).x1;
            d_omega.coeffs.zip_mut_with(&d1_theta.coeffs, |a, b| *a += *b);
        }
        if self.hooks.convection_source {
            d_theta.coeffs.zip_mut_with(&u.x2.coeffs, |a, b| *a += *b);
        }

        if !d_omega.is_finite() || !d_theta.is_finite() {
            return Err(RbError::BlowUp { t: state.t });
        }
        Ok((d_omega, d_theta))
    }

    /// Advective CFL step: c_cfl * dx / max(|u|_inf, floor), capped at DT_MAX.
    /// The dissipation imposes no constraint (exact propagator).
    pub fn cfl_dt(&self, state: &SolverState, c_cfl: f64) -> Result<f64> {
        let u = self.velocity_physical(state)?;
        let umax = u.magnitude().max_abs();
        Ok((c_cfl * self.grid.dx() / umax.max(CFL_FLOOR)).min(DT_MAX))
    }

    pub fn resolve_dt(&self, state: &SolverState, dt: DtSpec) -> Result<f64> {
        match dt {
            DtSpec::Fixed(h) => {
                if !(h > 0.0 && h.is_finite()) {
                    return Err(RbError::Config(format!("dt must be positive, got {h}")));
                }
                Ok(h)
            }
            DtSpec::Auto { c_cfl } => {
                if !(c_cfl > 0.0 && c_cfl <= 1.0) {
                    return Err(RbError::Config(format!(
                        "c_cfl must lie in (0, 1], got {c_cfl}"
                    )));
                }
                self.cfl_dt(state, c_cfl)
            }
        }
    }

    /// One step of integrating-factor RK4. The linear decay enters through
    /// the exact symbol exp(-dt |k|/g), so an isolated mode with the
    /// nonlinearity disabled decays exactly.
    pub fn step(&self, state: &SolverState, dt: f64) -> Result<SolverState> {
        let half = self.propagator(0.5 * dt)?;
        let full = self.propagator(dt)?;

        let (aw, at) = self.nonlinear_rhs(state)?;

        let mut s2 = SolverState {
            omega: lin_comb(&state.omega, &aw, 0.5 * dt),
            theta: lin_comb(&state.theta, &at, 0.5 * dt),
            t: state.t + 0.5 * dt,
        };
        s2.omega = apply_opt(&half, s2.omega);
        let (bw, bt) = self.nonlinear_rhs(&s2)?;

        let s3 = SolverState {
            omega: lin_comb(&apply_opt(&half, state.omega.clone()), &bw, 0.5 * dt),
            theta: lin_comb(&state.theta, &bt, 0.5 * dt),
            t: state.t + 0.5 * dt,
        };
        let (cw, ct) = self.nonlinear_rhs(&s3)?;

        let s4 = SolverState {
            omega: lin_comb(
                &apply_opt(&full, state.omega.clone()),
                &apply_opt(&half, cw.clone()),
                dt,
            ),
            theta: lin_comb(&state.theta, &ct, dt),
            t: state.t + dt,
        };
        let (dw, dt_rhs) = self.nonlinear_rhs(&s4)?;

        // omega_{n+1} = E omega + dt/6 (E A + 2 E2 (B + C) + D)
        let mut acc = apply_opt(&full, aw);
        let mut bc = bw;
        bc.coeffs.zip_mut_with(&cw.coeffs, |a, b| *a += *b);
        let bc = apply_opt(&half, bc);
        acc.coeffs.zip_mut_with(&bc.coeffs, |a, b| *a += 2.0 * *b);
        acc.coeffs.zip_mut_with(&dw.coeffs, |a, b| *a += *b);
        let mut omega = apply_opt(&full, state.omega.clone());
        omega
            .coeffs
            .zip_mut_with(&acc.coeffs, |a, b| *a += dt / 6.0 * *b);

        let mut tacc = at;
        tacc.coeffs.zip_mut_with(&bt.coeffs, |a, b| *a += 2.0 * *b);
        tacc.coeffs.zip_mut_with(&ct.coeffs, |a, b| *a += 2.0 * *b);
        tacc.coeffs.zip_mut_with(&dt_rhs.coeffs, |a, b| *a += *b);
        let mut theta = state.theta.clone();
        theta
            .coeffs
            .zip_mut_with(&tacc.coeffs, |a, b| *a += dt / 6.0 * *b);

        if self.dealias {
            self.grid.dealias_in_place(&mut omega);
            self.grid.dealias_in_place(&mut theta);
        }
        omega.coeffs[(0, 0)] = Complex64::new(0.0, 0.0);

        if !omega.is_finite() || !theta.is_finite() {
            return Err(RbError::BlowUp { t: state.t });
        }
        Ok(SolverState {
            omega,
            theta,
            t: state.t + dt,
        })
    }

    fn propagator(&self, dt: f64) -> Result<Option<MultiplierOp>> {
        if self.hooks.dissipation {
            Ok(Some(linear_propagator(&self.grid, &self.symbol, dt)?))
        } else {
            Ok(None)
        }
    }

    pub fn l_op(&self) -> &MultiplierOp {
        &self.l_op
    }

    /// Post-hoc pressure from the divergence of the momentum equation:
    /// p(k) = [F(div(u . grad u)) - i k2 theta] / |k|^2, p(0) = 0.
    pub fn recover_pressure(&self, state: &SolverState) -> Result<SpectralField2D> {
        let n = self.grid.n();
        let u = self.velocity(state)?;
        let u_phys = VectorField2D {
            x1: self.grid.inverse(&u.x1)?,
            x2: self.grid.inverse(&u.x2)?,
        };
        let conv1 = self.advect(&u_phys, &u.x1)?;
        let conv2 = self.advect(&u_phys, &u.x2)?;
        let div = self.grid.divergence(&SpectralVector2D {
            x1: conv1,
            x2: conv2,
        });

        let mut p = SpectralField2D::zeros(n);
        for i in 0..n {
            for j in 0..n {
                if i == 0 && j == 0 {
                    continue;
                }
                let km2 = self.grid.kmag()[(i, j)].powi(2);
                let ik2_theta =
                    Complex64::new(0.0, self.grid.k_deriv_at(j)) * state.theta.coeffs[(i, j)];
                p.coeffs[(i, j)] = (div.coeffs[(i, j)] - ik2_theta) / km2;
            }
        }
        Ok(p)
    }
}

fn lin_comb(base: &SpectralField2D, slope: &SpectralField2D, factor: f64) -> SpectralField2D {
    let mut out = base.clone();
    out.coeffs
        .zip_mut_with(&slope.coeffs, |a, b| *a += factor * *b);
    out
}

fn apply_opt(op: &Option<MultiplierOp>, f: SpectralField2D) -> SpectralField2D {
    match op {
        Some(op) => op.apply(&f),
        None => f,
    }
}
