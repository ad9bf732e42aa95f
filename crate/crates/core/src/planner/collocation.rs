//! Hermite-Simpson transcription of the minimum-actuation problem.

use nalgebra::{SMatrix, Vector2};

use super::banded::SymBanded;
use super::solver::{Nlp, SparseRows};
use super::{BoundaryConditions, PlannerConfig};
use crate::error::{Error, Result};
use crate::model::{
    dynamics, jacobians, Control, ControlVector, InputMatrix, PlatformParams, State, StateMatrix,
    StateVector, CONTROL_DIM, STATE_DIM,
};
use crate::scalar::{unwrap_near, wrap_angle, Real};

/// Per-interval Hermite-Simpson quantities.
#[derive(Debug, Clone, Copy)]
pub struct IntervalData<T: Real> {
    pub defect: StateVector<T>,
    pub mid_state: StateVector<T>,
    pub mid_control: ControlVector<T>,
}

/// Evaluates one collocation interval with the nominal (disturbance-free) model.
pub fn hermite_interval<T: Real>(
    xk: &StateVector<T>,
    xk1: &StateVector<T>,
    uk: &ControlVector<T>,
    uk1: &ControlVector<T>,
    p: &PlatformParams<T>,
    dt: T,
) -> IntervalData<T> {
    let w = Vector2::zeros();
    let half = T::lit(0.5);
    let fk = dynamics(xk, uk, p, &w);
    let fk1 = dynamics(xk1, uk1, p, &w);
    let mid_state = (xk + xk1) * half + (fk - fk1) * (dt / T::lit(8.0));
    let mid_control = (uk + uk1) * half;
    let fm = dynamics(&mid_state, &mid_control, p, &w);
    let defect = xk1 - xk - (fk + fm * T::lit(4.0) + fk1) * (dt / T::lit(6.0));
    IntervalData {
        defect,
        mid_state,
        mid_control,
    }
}

/// Collocation defects `x_{k+1} - x_k - dt/6 (f_k + 4 f_{k+1/2} + f_{k+1})`,
/// one row per interval.
pub fn hermite_defects<T: Real>(
    states: &[State<T>],
    controls: &[Control<T>],
    p: &PlatformParams<T>,
    dt: T,
) -> Result<Vec<StateVector<T>>> {
    if states.len() != controls.len() {
        return Err(Error::Dimension(format!(
            "{} state knots but {} control knots",
            states.len(),
            controls.len()
        )));
    }
    if states.len() < 2 {
        return Err(Error::Dimension("need at least two knots".into()));
    }
    Ok(states
        .windows(2)
        .zip(controls.windows(2))
        .map(|(x, u)| {
            hermite_interval(
                &x[0].to_vector(),
                &x[1].to_vector(),
                &u[0].to_vector(),
                &u[1].to_vector(),
                p,
                dt,
            )
            .defect
        })
        .collect())
}

/// Inf-norm over all defect entries.
pub fn max_defect<T: Real>(defects: &[StateVector<T>]) -> T {
    defects
        .iter()
        .flat_map(|d| d.iter().copied())
        .fold(T::zero(), |m, v| m.max(v.abs()))
}

type DefectStateJac = StateMatrix<f64>;
type DefectControlJac = InputMatrix<f64>;

/// Analytic partial derivatives of one interval's defect with respect to
/// `(x_k, x_{k+1}, u_k, u_{k+1})`.
pub fn defect_jacobians(
    xk: &StateVector<f64>,
    xk1: &StateVector<f64>,
    uk: &ControlVector<f64>,
    uk1: &ControlVector<f64>,
    p: &PlatformParams<f64>,
    dt: f64,
) -> (
    DefectStateJac,
    DefectStateJac,
    DefectControlJac,
    DefectControlJac,
) {
    let id = StateMatrix::<f64>::identity();
    let data = hermite_interval(xk, xk1, uk, uk1, p, dt);
    let (ak, bk) = jacobians(xk, uk, p);
    let (ak1, bk1) = jacobians(xk1, uk1, p);
    let (am, bm) = jacobians(&data.mid_state, &data.mid_control, p);
    let e = dt / 8.0;
    let dfm_dxk = am * (id * 0.5 + ak * e);
    let dfm_dxk1 = am * (id * 0.5 - ak1 * e);
    let dfm_duk: SMatrix<f64, STATE_DIM, CONTROL_DIM> = am * bk * e + bm * 0.5;
    let dfm_duk1: SMatrix<f64, STATE_DIM, CONTROL_DIM> = -(am * bk1) * e + bm * 0.5;
    let s = dt / 6.0;
    (
        -id - (ak + dfm_dxk * 4.0) * s,
        id - (dfm_dxk1 * 4.0 + ak1) * s,
        -(bk + dfm_duk * 4.0) * s,
        -(dfm_duk1 * 4.0 + bk1) * s,
    )
}

/// Decision-vector layout: all knot states, then all knot controls.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub knots: usize,
}

impl Layout {
    pub fn len(&self) -> usize {
        self.knots * (STATE_DIM + CONTROL_DIM)
    }

    pub fn is_empty(&self) -> bool {
        self.knots == 0
    }

    #[inline]
    pub fn state(&self, k: usize, i: usize) -> usize {
        k * STATE_DIM + i
    }

    #[inline]
    pub fn control(&self, k: usize, j: usize) -> usize {
        self.knots * STATE_DIM + k * CONTROL_DIM + j
    }

    pub fn pack(&self, states: &[State<f64>], controls: &[Control<f64>]) -> Vec<f64> {
        let mut z = Vec::with_capacity(self.len());
        for s in states {
            z.extend_from_slice(&s.to_array());
        }
        for u in controls {
            z.extend_from_slice(&u.to_array());
        }
        z
    }

    pub fn unpack(&self, z: &[f64]) -> (Vec<State<f64>>, Vec<Control<f64>>) {
        let n = self.knots;
        let states = (0..n)
            .map(|k| {
                let mut a = [0.0; STATE_DIM];
                a.copy_from_slice(&z[k * STATE_DIM..(k + 1) * STATE_DIM]);
                State::from_array(a)
            })
            .collect();
        let off = n * STATE_DIM;
        let controls = (0..n)
            .map(|k| {
                let mut a = [0.0; CONTROL_DIM];
                a.copy_from_slice(&z[off + k * CONTROL_DIM..off + (k + 1) * CONTROL_DIM]);
                Control::from_array(a)
            })
            .collect();
        (states, controls)
    }

    fn state_vec(&self, z: &[f64], k: usize) -> StateVector<f64> {
        StateVector::from_column_slice(&z[k * STATE_DIM..(k + 1) * STATE_DIM])
    }

    fn control_vec(&self, z: &[f64], k: usize) -> ControlVector<f64> {
        let off = self.knots * STATE_DIM + k * CONTROL_DIM;
        ControlVector::from_column_slice(&z[off..off + CONTROL_DIM])
    }
}

/// Transcribed nonlinear program for one planning segment.
#[derive(Debug, Clone)]
pub struct CollocationProblem {
    pub layout: Layout,
    pub dt: f64,
    pub params: PlatformParams<f64>,
    pub weights: [f64; CONTROL_DIM],
    pub x_init: State<f64>,
    /// Final boundary state, with the heading moved onto the branch nearest
    /// `x_init`'s heading.
    pub x_final: State<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    /// Scale applied to every defect row inside the solver (>= 1, so a scaled
    /// violation bounds the raw one).
    row_scale: f64,
}

pub const BOUNDARY_EQUALITIES: usize = 2 * STATE_DIM;

/// Effective `(state_lower, state_upper, control_lower, control_upper)`: the
/// configured boxes intersected with the physical limits.
pub fn effective_bounds(
    cfg: &PlannerConfig,
    p: &PlatformParams<f64>,
) -> (
    [f64; STATE_DIM],
    [f64; STATE_DIM],
    [f64; CONTROL_DIM],
    [f64; CONTROL_DIM],
) {
    let mut xl = cfg.state_lower;
    let mut xu = cfg.state_upper;
    xl[6] = xl[6].max(-p.rw_speed_max);
    xu[6] = xu[6].min(p.rw_speed_max);
    let mut ul = cfg.control_lower;
    let mut uu = cfg.control_upper;
    ul[0] = ul[0].max(-p.rw_torque_max);
    uu[0] = uu[0].min(p.rw_torque_max);
    for j in 1..CONTROL_DIM {
        ul[j] = ul[j].max(0.0);
        uu[j] = uu[j].min(p.thrust_max);
    }
    (xl, xu, ul, uu)
}

fn within(s: &State<f64>, lo: &[f64; STATE_DIM], hi: &[f64; STATE_DIM]) -> bool {
    s.to_array()
        .iter()
        .zip(lo.iter().zip(hi))
        .all(|(v, (l, u))| *v >= *l && *v <= *u)
}

/// Final boundary state with its heading moved to within pi of the initial
/// heading. Headings already on that branch are kept bit-for-bit.
pub fn rebranch_final(bc: &BoundaryConditions) -> State<f64> {
    let mut x_final = bc.x_final;
    if (x_final.theta - bc.x_init.theta).abs() > std::f64::consts::PI {
        x_final.theta = unwrap_near(bc.x_final.theta, bc.x_init.theta);
    }
    x_final
}

/// Builds the nonlinear program: minimize `sum_k u_k^T R u_k` over all knots
/// subject to the boundary conditions, the collocation defects and the box
/// bounds.
pub fn transcribe(
    bc: &BoundaryConditions,
    cfg: &PlannerConfig,
    p: &PlatformParams<f64>,
) -> Result<CollocationProblem> {
    cfg.validate()?;
    p.validate()?;
    bc.validate()?;
    let (xl, xu, ul, uu) = effective_bounds(cfg, p);
    let x_final = rebranch_final(bc);
    for (name, s) in [("initial", &bc.x_init), ("final", &x_final)] {
        if !within(s, &xl, &xu) {
            return Err(Error::Domain(format!(
                "{name} boundary state outside the state bounds"
            )));
        }
    }
    let layout = Layout { knots: cfg.knots };
    let n = cfg.knots;
    let dt = bc.duration / (n - 1) as f64;
    let mut lower = Vec::with_capacity(layout.len());
    let mut upper = Vec::with_capacity(layout.len());
    for k in 0..n {
        let pinned = if k == 0 {
            Some(bc.x_init)
        } else if k == n - 1 {
            Some(x_final)
        } else {
            None
        };
        match pinned {
            Some(s) => {
                lower.extend_from_slice(&s.to_array());
                upper.extend_from_slice(&s.to_array());
            }
            None => {
                lower.extend_from_slice(&xl);
                upper.extend_from_slice(&xu);
            }
        }
    }
    for _ in 0..n {
        lower.extend_from_slice(&ul);
        upper.extend_from_slice(&uu);
    }
    let inv = 1.0 / dt;
    let row_scale = inv.max(1.0);
    Ok(CollocationProblem {
        layout,
        dt,
        params: *p,
        weights: cfg.actuation_weight,
        x_init: bc.x_init,
        x_final,
        lower,
        upper,
        row_scale,
    })
}

impl CollocationProblem {
    pub fn decision_len(&self) -> usize {
        self.layout.len()
    }

    pub fn boundary_equality_count(&self) -> usize {
        BOUNDARY_EQUALITIES
    }

    pub fn defect_equality_count(&self) -> usize {
        (self.layout.knots - 1) * STATE_DIM
    }

    pub fn equality_count(&self) -> usize {
        self.boundary_equality_count() + self.defect_equality_count()
    }

    /// `sum_k u_k^T R u_k`.
    pub fn cost(&self, controls: &[Control<f64>]) -> f64 {
        controls
            .iter()
            .map(|u| {
                u.to_array()
                    .iter()
                    .zip(&self.weights)
                    .map(|(v, r)| r * v * v)
                    .sum::<f64>()
            })
            .sum()
    }

    /// Unscaled boundary residual (heading compared modulo 2 pi).
    pub fn boundary_residual(&self, states: &[State<f64>]) -> f64 {
        let mut worst = 0.0f64;
        for (s, target) in [
            (&states[0], &self.x_init),
            (states.last().unwrap(), &self.x_final),
        ] {
            let (a, b) = (s.to_array(), target.to_array());
            for i in 0..STATE_DIM {
                let d = if i == 2 {
                    wrap_angle(a[i] - b[i])
                } else {
                    a[i] - b[i]
                };
                worst = worst.max(d.abs());
            }
        }
        worst
    }
}

impl Nlp for CollocationProblem {
    fn dim(&self) -> usize {
        self.layout.len()
    }

    fn lower(&self) -> &[f64] {
        &self.lower
    }

    fn upper(&self) -> &[f64] {
        &self.upper
    }

    fn objective(&self, z: &[f64]) -> f64 {
        let l = &self.layout;
        let mut f = 0.0;
        for k in 0..l.knots {
            for j in 0..CONTROL_DIM {
                let u = z[l.control(k, j)];
                f += self.weights[j] * u * u;
            }
        }
        f
    }

    fn objective_gradient(&self, z: &[f64], grad: &mut [f64]) {
        grad.iter_mut().for_each(|g| *g = 0.0);
        let l = &self.layout;
        for k in 0..l.knots {
            for j in 0..CONTROL_DIM {
                let idx = l.control(k, j);
                grad[idx] = 2.0 * self.weights[j] * z[idx];
            }
        }
    }

    fn add_objective_hessian(&self, _z: &[f64], position: &[usize], h: &mut SymBanded) {
        let l = &self.layout;
        for k in 0..l.knots {
            for j in 0..CONTROL_DIM {
                h.add_diagonal(position[l.control(k, j)], 2.0 * self.weights[j]);
            }
        }
    }

    fn constraint_count(&self) -> usize {
        self.equality_count()
    }

    fn constraints(&self, z: &[f64], c: &mut [f64]) {
        let l = &self.layout;
        let last = l.knots - 1;
        let (xi, xf) = (self.x_init.to_array(), self.x_final.to_array());
        for i in 0..STATE_DIM {
            c[i] = z[l.state(0, i)] - xi[i];
            c[STATE_DIM + i] = z[l.state(last, i)] - xf[i];
        }
        for k in 0..last {
            let d = hermite_interval(
                &l.state_vec(z, k),
                &l.state_vec(z, k + 1),
                &l.control_vec(z, k),
                &l.control_vec(z, k + 1),
                &self.params,
                self.dt,
            )
            .defect;
            for i in 0..STATE_DIM {
                c[BOUNDARY_EQUALITIES + k * STATE_DIM + i] = d[i] * self.row_scale;
            }
        }
    }

    fn constraint_jacobian(&self, z: &[f64]) -> SparseRows {
        let l = &self.layout;
        let last = l.knots - 1;
        let mut rows = Vec::with_capacity(self.equality_count());
        for i in 0..STATE_DIM {
            rows.push(vec![(l.state(0, i), 1.0)]);
        }
        for i in 0..STATE_DIM {
            rows.push(vec![(l.state(last, i), 1.0)]);
        }
        for k in 0..last {
            let (dxk, dxk1, duk, duk1) = defect_jacobians(
                &l.state_vec(z, k),
                &l.state_vec(z, k + 1),
                &l.control_vec(z, k),
                &l.control_vec(z, k + 1),
                &self.params,
                self.dt,
            );
            for i in 0..STATE_DIM {
                let s = self.row_scale;
                let mut row = Vec::with_capacity(2 * (STATE_DIM + CONTROL_DIM));
                for j in 0..STATE_DIM {
                    if dxk[(i, j)] != 0.0 {
                        row.push((l.state(k, j), dxk[(i, j)] * s));
                    }
                    if dxk1[(i, j)] != 0.0 {
                        row.push((l.state(k + 1, j), dxk1[(i, j)] * s));
                    }
                }
                for j in 0..CONTROL_DIM {
                    if duk[(i, j)] != 0.0 {
                        row.push((l.control(k, j), duk[(i, j)] * s));
                    }
                    if duk1[(i, j)] != 0.0 {
                        row.push((l.control(k + 1, j), duk1[(i, j)] * s));
                    }
                }
                rows.push(row);
            }
        }
        SparseRows { rows }
    }

    fn band_position(&self) -> Vec<usize> {
        let l = &self.layout;
        let stride = STATE_DIM + CONTROL_DIM;
        let mut pos = vec![0; l.len()];
        for k in 0..l.knots {
            for i in 0..STATE_DIM {
                pos[l.state(k, i)] = k * stride + i;
            }
            for j in 0..CONTROL_DIM {
                pos[l.control(k, j)] = k * stride + STATE_DIM + j;
            }
        }
        pos
    }

    fn bandwidth(&self) -> usize {
        2 * (STATE_DIM + CONTROL_DIM) - 1
    }
}
