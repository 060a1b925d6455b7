//! Dense bounded-variable simplex with warm restarts.
//!
//! Solves `max c·x` subject to `A x + s = b`, `l <= x <= u`, `s >= 0`. The
//! full tableau `B^{-1}[A I]` is kept so that right-hand-side, bound and cost
//! edits can be re-optimized from the previous basis: cost edits by primal
//! iterations, bound and right-hand-side edits by dual iterations.

const PIVOT_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-7;
const DUAL_TOL: f64 = 1e-9;
const DEGENERATE_SWITCH: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarState {
    Basic,
    AtLower,
    AtUpper,
}

/// One structural column.
#[derive(Debug, Clone, Default)]
pub struct Column {
    pub entries: Vec<(usize, f64)>,
    pub cost: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone)]
pub struct Simplex {
    m: usize,
    n: usize,
    width: usize,
    tab: Vec<f64>,
    bbar: Vec<f64>,
    beta: Vec<f64>,
    d: Vec<f64>,
    cost: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    basis: Vec<usize>,
    state: Vec<VarState>,
    b: Vec<f64>,
    row_nz: Vec<usize>,
    saved_cost: Vec<(usize, f64)>,
    pending_cost: bool,
    pub iterations: usize,
}

impl Simplex {
    /// Builds the problem with every structural variable at its lower bound
    /// and the slack basis.
    pub fn new(rows: usize, columns: &[Column], b: &[f64]) -> Self {
        assert_eq!(b.len(), rows);
        let n = columns.len();
        let width = n + rows;
        let mut tab = vec![0.0; rows * width];
        let mut cost = vec![0.0; width];
        let mut lower = vec![0.0; width];
        let mut upper = vec![f64::INFINITY; width];
        for (j, col) in columns.iter().enumerate() {
            for &(i, v) in &col.entries {
                tab[i * width + j] += v;
            }
            cost[j] = col.cost;
            lower[j] = col.lower;
            upper[j] = col.upper;
        }
        for i in 0..rows {
            tab[i * width + n + i] = 1.0;
        }
        let mut lp = Self {
            m: rows,
            n,
            width,
            tab,
            bbar: b.to_vec(),
            beta: vec![0.0; rows],
            d: cost.clone(),
            cost,
            lower,
            upper,
            basis: (n..width).collect(),
            state: (0..width)
                .map(|j| if j < n { VarState::AtLower } else { VarState::Basic })
                .collect(),
            b: b.to_vec(),
            row_nz: Vec::with_capacity(width),
            saved_cost: Vec::new(),
            pending_cost: false,
            iterations: 0,
        };
        lp.recompute_beta();
        lp
    }

    pub fn rows(&self) -> usize {
        self.m
    }

    pub fn structural(&self) -> usize {
        self.n
    }

    fn nonbasic_value(&self, j: usize) -> f64 {
        match self.state[j] {
            VarState::AtLower => self.lower[j],
            VarState::AtUpper => self.upper[j],
            VarState::Basic => unreachable!(),
        }
    }

    fn recompute_beta(&mut self) {
        self.beta.copy_from_slice(&self.bbar);
        for j in 0..self.width {
            if self.state[j] == VarState::Basic {
                continue;
            }
            let x = self.nonbasic_value(j);
            if x != 0.0 {
                for i in 0..self.m {
                    let t = self.tab[i * self.width + j];
                    if t != 0.0 {
                        self.beta[i] -= t * x;
                    }
                }
            }
        }
    }

    fn recompute_reduced_costs(&mut self) {
        self.d.copy_from_slice(&self.cost);
        for i in 0..self.m {
            let cb = self.cost[self.basis[i]];
            if cb != 0.0 {
                let row = &self.tab[i * self.width..(i + 1) * self.width];
                for (dj, t) in self.d.iter_mut().zip(row) {
                    *dj -= cb * t;
                }
            }
        }
    }

    pub fn set_cost(&mut self, j: usize, c: f64) {
        if self.cost[j] != c {
            self.cost[j] = c;
            self.pending_cost = true;
        }
    }

    pub fn cost(&self, j: usize) -> f64 {
        self.cost[j]
    }

    /// Changes the bounds of structural variable `j`.
    pub fn set_bounds(&mut self, j: usize, lower: f64, upper: f64) {
        debug_assert!(lower <= upper);
        if self.lower[j] == lower && self.upper[j] == upper {
            return;
        }
        if self.state[j] == VarState::Basic {
            self.lower[j] = lower;
            self.upper[j] = upper;
            return;
        }
        let old = self.nonbasic_value(j);
        self.lower[j] = lower;
        self.upper[j] = upper;
        self.state[j] = self.dual_feasible_side(j);
        let delta = self.nonbasic_value(j) - old;
        if delta != 0.0 {
            for i in 0..self.m {
                let t = self.tab[i * self.width + j];
                if t != 0.0 {
                    self.beta[i] -= t * delta;
                }
            }
        }
    }

    pub fn bounds(&self, j: usize) -> (f64, f64) {
        (self.lower[j], self.upper[j])
    }

    /// Changes the right-hand side of row `i`.
    pub fn set_rhs(&mut self, i: usize, value: f64) {
        let delta = value - self.b[i];
        if delta == 0.0 {
            return;
        }
        self.b[i] = value;
        let slack = self.n + i;
        for r in 0..self.m {
            let t = self.tab[r * self.width + slack];
            if t != 0.0 {
                self.bbar[r] += t * delta;
                self.beta[r] += t * delta;
            }
        }
    }

    pub fn rhs(&self, i: usize) -> f64 {
        self.b[i]
    }

    fn dual_feasible_side(&self, j: usize) -> VarState {
        let finite = self.upper[j].is_finite();
        if self.d[j] > DUAL_TOL && finite {
            VarState::AtUpper
        } else if self.d[j] < -DUAL_TOL || !finite {
            VarState::AtLower
        } else {
            self.state[j]
        }
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let w = self.width;
        let piv = self.tab[r * w + q];
        {
            let row = &mut self.tab[r * w..(r + 1) * w];
            let inv = 1.0 / piv;
            self.row_nz.clear();
            for (j, v) in row.iter_mut().enumerate() {
                if *v != 0.0 {
                    *v *= inv;
                    if v.abs() < 1e-14 {
                        *v = 0.0;
                    } else {
                        self.row_nz.push(j);
                    }
                }
            }
            row[q] = 1.0;
            self.bbar[r] *= inv;
        }
        let (before, rest) = self.tab.split_at_mut(r * w);
        let (pivot_row, after) = rest.split_at_mut(w);
        let nz = &self.row_nz;
        let dense = nz.len() * 4 > w;
        let update = |row: &mut [f64]| {
            let f = row[q];
            if f != 0.0 {
                if dense {
                    for (a, &b) in row.iter_mut().zip(pivot_row.iter()) {
                        *a -= f * b;
                    }
                } else {
                    for &j in nz {
                        row[j] -= f * pivot_row[j];
                    }
                }
                row[q] = 0.0;
            }
            f
        };
        for (i, row) in before.chunks_exact_mut(w).enumerate() {
            let f = update(row);
            if f != 0.0 {
                self.bbar[i] -= f * self.bbar[r];
            }
        }
        for (k, row) in after.chunks_exact_mut(w).enumerate() {
            let f = update(row);
            if f != 0.0 {
                self.bbar[r + 1 + k] -= f * self.bbar[r];
            }
        }
        let f = self.d[q];
        if f != 0.0 {
            for &j in nz {
                self.d[j] -= f * pivot_row[j];
            }
            self.d[q] = 0.0;
        }
        self.basis[r] = q;
        self.state[q] = VarState::Basic;
        self.iterations += 1;
    }

    /// Runs whatever iterations the pending edits require.
    pub fn optimize(&mut self) -> LpStatus {
        if self.pending_cost {
            self.recompute_reduced_costs();
            self.pending_cost = false;
        }
        if self.primal_infeasibility() > FEAS_TOL {
            // Make the basis dual feasible, flipping bounded variables and
            // temporarily shifting the cost of any that cannot flip.
            let mut shifted = false;
            let mut flipped = false;
            for j in 0..self.width {
                if self.state[j] == VarState::Basic || self.upper[j] <= self.lower[j] {
                    continue;
                }
                let bad = match self.state[j] {
                    VarState::AtLower => self.d[j] > DUAL_TOL,
                    VarState::AtUpper => self.d[j] < -DUAL_TOL,
                    VarState::Basic => false,
                };
                if !bad {
                    continue;
                }
                if self.upper[j].is_finite() {
                    self.state[j] = self.dual_feasible_side(j);
                    flipped = true;
                } else {
                    self.saved_cost.push((j, self.cost[j]));
                    self.cost[j] -= self.d[j];
                    self.d[j] = 0.0;
                    shifted = true;
                }
            }
            if flipped {
                self.recompute_beta();
            }
            let status = self.dual();
            if shifted {
                for (j, c) in std::mem::take(&mut self.saved_cost) {
                    self.cost[j] = c;
                }
                self.recompute_reduced_costs();
            }
            if status != LpStatus::Optimal {
                return status;
            }
        }
        self.primal()
    }

    fn primal_infeasibility(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.m {
            let j = self.basis[i];
            worst = worst
                .max(self.lower[j] - self.beta[i])
                .max(self.beta[i] - self.upper[j]);
        }
        worst
    }

    fn iteration_cap(&self) -> usize {
        50 * (self.m + self.width) + 1000
    }

    fn primal(&mut self) -> LpStatus {
        let w = self.width;
        let mut degenerate_run = 0;
        for _ in 0..self.iteration_cap() {
            let bland = degenerate_run >= DEGENERATE_SWITCH;
            // entering variable
            let mut q = usize::MAX;
            let mut best = 0.0;
            for j in 0..w {
                let dir = match self.state[j] {
                    VarState::Basic => continue,
                    VarState::AtLower if self.d[j] > DUAL_TOL && self.upper[j] > self.lower[j] => 1.0,
                    VarState::AtUpper if self.d[j] < -DUAL_TOL && self.upper[j] > self.lower[j] => -1.0,
                    _ => continue,
                };
                let score = self.d[j] * dir;
                if bland {
                    q = j;
                    break;
                }
                if score > best {
                    best = score;
                    q = j;
                }
            }
            if q == usize::MAX {
                return LpStatus::Optimal;
            }
            let dir = if self.state[q] == VarState::AtLower { 1.0 } else { -1.0 };

            // ratio test
            let mut step = self.upper[q] - self.lower[q];
            let mut leave: Option<(usize, VarState)> = None;
            for i in 0..self.m {
                let t = self.tab[i * w + q] * dir;
                if t.abs() <= PIVOT_TOL {
                    continue;
                }
                let b = self.basis[i];
                let (limit, side) = if t > 0.0 {
                    ((self.beta[i] - self.lower[b]) / t, VarState::AtLower)
                } else if self.upper[b].is_finite() {
                    ((self.upper[b] - self.beta[i]) / -t, VarState::AtUpper)
                } else {
                    continue;
                };
                let limit = limit.max(0.0);
                let better = match leave {
                    None => limit < step,
                    Some((r, _)) => {
                        limit < step - 1e-12
                            || (limit <= step + 1e-12
                                && if bland {
                                    b < self.basis[r]
                                } else {
                                    self.tab[i * w + q].abs() > self.tab[r * w + q].abs()
                                })
                    }
                };
                if better {
                    step = limit;
                    leave = Some((i, side));
                }
            }
            if !step.is_finite() {
                return LpStatus::Unbounded;
            }
            if step <= 1e-12 {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            for i in 0..self.m {
                let t = self.tab[i * w + q];
                if t != 0.0 {
                    self.beta[i] -= t * dir * step;
                }
            }
            match leave {
                None => {
                    // bound flip
                    self.state[q] = if dir > 0.0 {
                        VarState::AtUpper
                    } else {
                        VarState::AtLower
                    };
                    self.iterations += 1;
                }
                Some((r, side)) => {
                    let entering_value = self.nonbasic_value(q) + dir * step;
                    let leaving = self.basis[r];
                    self.pivot(r, q);
                    self.state[leaving] = side;
                    self.beta[r] = entering_value;
                }
            }
        }
        LpStatus::IterationLimit
    }

    fn dual(&mut self) -> LpStatus {
        let w = self.width;
        for _ in 0..self.iteration_cap() {
            // leaving row: largest bound violation
            let mut r = usize::MAX;
            let mut worst = FEAS_TOL;
            for i in 0..self.m {
                let b = self.basis[i];
                let v = (self.lower[b] - self.beta[i]).max(self.beta[i] - self.upper[b]);
                if v > worst {
                    worst = v;
                    r = i;
                }
            }
            if r == usize::MAX {
                return LpStatus::Optimal;
            }
            let leaving = self.basis[r];
            let below = self.beta[r] < self.lower[leaving];
            let target = if below {
                self.lower[leaving]
            } else {
                self.upper[leaving]
            };
            // x_r = beta_r - sum_j T_rj dx_j; need x_r to move up if below.
            let mut q = usize::MAX;
            let mut best_ratio = f64::INFINITY;
            let mut best_piv = 0.0;
            for j in 0..w {
                let t = self.tab[r * w + j];
                if t.abs() <= PIVOT_TOL {
                    continue;
                }
                let ok = match self.state[j] {
                    VarState::Basic => false,
                    VarState::AtLower => {
                        self.upper[j] > self.lower[j] && if below { t < 0.0 } else { t > 0.0 }
                    }
                    VarState::AtUpper => {
                        self.upper[j] > self.lower[j] && if below { t > 0.0 } else { t < 0.0 }
                    }
                };
                if !ok {
                    continue;
                }
                let ratio = (self.d[j] / t).abs();
                if ratio < best_ratio - 1e-12
                    || (ratio <= best_ratio + 1e-12 && t.abs() > best_piv)
                {
                    best_ratio = ratio;
                    best_piv = t.abs();
                    q = j;
                }
            }
            if q == usize::MAX {
                return LpStatus::Infeasible;
            }
            let t = self.tab[r * w + q];
            let dx = (self.beta[r] - target) / t;
            for i in 0..self.m {
                let ti = self.tab[i * w + q];
                if ti != 0.0 {
                    self.beta[i] -= ti * dx;
                }
            }
            let entering_value = self.nonbasic_value(q) + dx;
            self.pivot(r, q);
            self.state[leaving] = if below {
                VarState::AtLower
            } else {
                VarState::AtUpper
            };
            self.beta[r] = entering_value;
        }
        LpStatus::IterationLimit
    }

    /// Value of variable `j` (structural or slack `n + i`).
    pub fn value(&self, j: usize) -> f64 {
        match self.state[j] {
            VarState::Basic => {
                let r = self.basis.iter().position(|&b| b == j).unwrap();
                self.beta[r]
            }
            _ => self.nonbasic_value(j),
        }
    }

    /// Values of all structural variables.
    pub fn values(&self) -> Vec<f64> {
        let mut x = vec![0.0; self.n];
        for j in 0..self.n {
            if self.state[j] != VarState::Basic {
                x[j] = self.nonbasic_value(j);
            }
        }
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.n {
                x[b] = self.beta[i];
            }
        }
        x
    }

    pub fn objective(&self) -> f64 {
        let mut z = 0.0;
        for j in 0..self.n {
            if self.state[j] != VarState::Basic {
                let x = self.nonbasic_value(j);
                if x != 0.0 {
                    z += self.cost[j] * x;
                }
            }
        }
        for (i, &b) in self.basis.iter().enumerate() {
            z += self.cost[b] * self.beta[i];
        }
        z
    }
}
