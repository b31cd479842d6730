use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::delta::DeltaRational;
use super::{dedup_lits, Deduction, Mark, TheorySolver, TheoryVerdict, Witness};
use crate::error::{Error, Result};
use crate::ir::{Atom, AtomId, Context, Literal, Rational, RealVar, Rel};

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
enum Reason {
    Lit(Literal),
    /// Temporary bound used while deciding disequalities.
    Probe,
}

#[derive(Clone, Debug)]
struct Bound {
    value: DeltaRational,
    reason: Reason,
}

/// `var rel value`.
#[derive(Clone, Debug)]
struct AtomInfo {
    var: usize,
    value: Rational,
    rel: Rel,
}

#[derive(Clone, Debug)]
enum Undo {
    Lower(usize, Option<Bound>),
    Upper(usize, Option<Bound>),
    Asserted(AtomId),
    Diseq,
}

/// General simplex over `x_basic = sum(a_j * x_nonbasic)` rows with
/// delta-rational bounds, Bland's pivoting rule, and Farkas-row conflict
/// explanations. Disequalities are decided in [`TheorySolver::check_full`]
/// by probing both strict sides.
#[derive(Clone, Debug, Default)]
pub struct LraSolver {
    var_of_real: HashMap<RealVar, usize>,
    real_of_var: Vec<Option<RealVar>>,
    slack_of_form: HashMap<Vec<(RealVar, BigInt)>, usize>,
    /// Dense tableau rows; `row_of[x]` is the row defining basic `x`.
    rows: Vec<Vec<Rational>>,
    row_basic: Vec<usize>,
    row_of: Vec<Option<usize>>,
    beta: Vec<DeltaRational>,
    lower: Vec<Option<Bound>>,
    upper: Vec<Option<Bound>>,
    atoms: BTreeMap<AtomId, AtomInfo>,
    asserted: Vec<Literal>,
    asserted_atoms: HashMap<AtomId, u32>,
    diseqs: Vec<(usize, Rational, Literal)>,
    undo: Vec<Undo>,
    marks: Vec<usize>,
    pivots: u64,
}

impl LraSolver {
    pub fn new() -> LraSolver {
        LraSolver::default()
    }

    /// Number of pivots performed so far.
    pub fn pivots(&self) -> u64 {
        self.pivots
    }

    fn num_vars(&self) -> usize {
        self.beta.len()
    }

    fn add_var(&mut self, real: Option<RealVar>) -> usize {
        let x = self.num_vars();
        self.beta.push(DeltaRational::zero());
        self.lower.push(None);
        self.upper.push(None);
        self.row_of.push(None);
        self.real_of_var.push(real);
        for r in &mut self.rows {
            r.push(Rational::zero());
        }
        x
    }

    fn var_of(&mut self, v: RealVar) -> usize {
        if let Some(&x) = self.var_of_real.get(&v) {
            return x;
        }
        let x = self.add_var(Some(v));
        self.var_of_real.insert(v, x);
        x
    }

    fn slack_of(&mut self, form: &[(RealVar, BigInt)]) -> usize {
        if let Some(&s) = self.slack_of_form.get(form) {
            return s;
        }
        let xs: Vec<(usize, Rational)> =
            form.iter().map(|(v, a)| (self.var_of(*v), Rational::from_integer(a.clone()))).collect();
        let s = self.add_var(None);
        let n = self.num_vars();
        let mut row = vec![Rational::zero(); n];
        let mut value = DeltaRational::zero();
        for (x, a) in xs {
            value = &value + &(&self.beta[x] * &a);
            match self.row_of[x] {
                Some(r) => {
                    for (j, c) in self.rows[r].iter().enumerate() {
                        if !c.is_zero() {
                            row[j] += &a * c;
                        }
                    }
                }
                None => row[x] += &a,
            }
        }
        self.beta[s] = value;
        self.row_of[s] = Some(self.rows.len());
        self.rows.push(row);
        self.row_basic.push(s);
        self.slack_of_form.insert(form.to_vec(), s);
        s
    }

    fn info(&mut self, ctx: &Context, atom: AtomId) -> Result<AtomInfo> {
        if let Some(i) = self.atoms.get(&atom) {
            return Ok(i.clone());
        }
        let Atom::Linear(a) = ctx.atoms.get(atom) else {
            return Err(Error::WrongTheory("LRA"));
        };
        let k = Rational::from_integer(a.constant().clone());
        let info = match a.coeffs() {
            [(v, c)] => {
                let c = Rational::from_integer(c.clone());
                AtomInfo { var: self.var_of(*v), value: -k / c, rel: a.rel() }
            }
            form => AtomInfo { var: self.slack_of(form), value: -k, rel: a.rel() },
        };
        self.atoms.insert(atom, info.clone());
        Ok(info)
    }

    fn set_lower(&mut self, x: usize, b: Option<Bound>) {
        let old = std::mem::replace(&mut self.lower[x], b);
        self.undo.push(Undo::Lower(x, old));
    }

    fn set_upper(&mut self, x: usize, b: Option<Bound>) {
        let old = std::mem::replace(&mut self.upper[x], b);
        self.undo.push(Undo::Upper(x, old));
    }

    fn update(&mut self, x: usize, v: DeltaRational) {
        let diff = &v - &self.beta[x];
        for r in 0..self.rows.len() {
            let a = &self.rows[r][x];
            if !a.is_zero() {
                let b = self.row_basic[r];
                self.beta[b] = &self.beta[b] + &(&diff * a);
            }
        }
        self.beta[x] = v;
    }

    fn assert_upper(&mut self, x: usize, value: DeltaRational, reason: Reason) -> Option<Vec<Reason>> {
        if let Some(u) = &self.upper[x] {
            if u.value <= value {
                return None;
            }
        }
        if let Some(l) = &self.lower[x] {
            if value < l.value {
                return Some(vec![l.reason, reason]);
            }
        }
        self.set_upper(x, Some(Bound { value: value.clone(), reason }));
        if self.row_of[x].is_none() && self.beta[x] > value {
            self.update(x, value);
        }
        None
    }

    fn assert_lower(&mut self, x: usize, value: DeltaRational, reason: Reason) -> Option<Vec<Reason>> {
        if let Some(l) = &self.lower[x] {
            if l.value >= value {
                return None;
            }
        }
        if let Some(u) = &self.upper[x] {
            if value > u.value {
                return Some(vec![u.reason, reason]);
            }
        }
        self.set_lower(x, Some(Bound { value: value.clone(), reason }));
        if self.row_of[x].is_none() && self.beta[x] < value {
            self.update(x, value);
        }
        None
    }

    fn pivot_and_update(&mut self, b: usize, j: usize, v: DeltaRational) {
        let r = self.row_of[b].expect("basic");
        let a = self.rows[r][j].clone();
        let theta = &(&v - &self.beta[b]) * &(Rational::one() / &a);
        self.beta[b] = v;
        self.beta[j] = &self.beta[j] + &theta;
        for k in 0..self.rows.len() {
            if k == r {
                continue;
            }
            let c = &self.rows[k][j];
            if !c.is_zero() {
                let bk = self.row_basic[k];
                self.beta[bk] = &self.beta[bk] + &(&theta * c);
            }
        }
        self.pivot(r, b, j);
    }

    /// Exchanges basic `b` (row `r`) with nonbasic `j`.
    fn pivot(&mut self, r: usize, b: usize, j: usize) {
        self.pivots += 1;
        let a = self.rows[r][j].clone();
        let mut row = std::mem::take(&mut self.rows[r]);
        // x_j = (b - sum_{i != j} a_i x_i) / a
        let inv = Rational::one() / &a;
        for (i, c) in row.iter_mut().enumerate() {
            if i == j {
                *c = Rational::zero();
            } else if !c.is_zero() {
                *c = -(&*c * &inv);
            }
        }
        row[b] = inv;
        for k in 0..self.rows.len() {
            if k == r {
                continue;
            }
            let c = std::mem::take(&mut self.rows[k][j]);
            if c.is_zero() {
                continue;
            }
            for (i, x) in row.iter().enumerate() {
                if !x.is_zero() {
                    self.rows[k][i] += &c * x;
                }
            }
        }
        self.rows[r] = row;
        self.row_basic[r] = j;
        self.row_of[j] = Some(r);
        self.row_of[b] = None;
    }

    /// Restores feasibility of the basic variables, or explains why that is
    /// impossible.
    fn simplex(&mut self) -> Option<Vec<Reason>> {
        loop {
            let mut violated = None;
            for x in 0..self.num_vars() {
                if self.row_of[x].is_none() {
                    continue;
                }
                if self.lower[x].as_ref().is_some_and(|l| self.beta[x] < l.value) {
                    violated = Some((x, true));
                    break;
                }
                if self.upper[x].as_ref().is_some_and(|u| self.beta[x] > u.value) {
                    violated = Some((x, false));
                    break;
                }
            }
            let (b, increase) = violated?;
            let r = self.row_of[b].expect("basic");
            let mut entering = None;
            for j in 0..self.num_vars() {
                let a = &self.rows[r][j];
                if a.is_zero() || j == b {
                    continue;
                }
                let up = a.is_positive() == increase;
                let slack = if up {
                    self.upper[j].as_ref().is_none_or(|u| self.beta[j] < u.value)
                } else {
                    self.lower[j].as_ref().is_none_or(|l| self.beta[j] > l.value)
                };
                if slack {
                    entering = Some(j);
                    break;
                }
            }
            match entering {
                Some(j) => {
                    let target = if increase { &self.lower[b] } else { &self.upper[b] };
                    let v = target.as_ref().expect("violated bound").value.clone();
                    self.pivot_and_update(b, j, v);
                }
                None => {
                    let mut expl = vec![if increase { &self.lower[b] } else { &self.upper[b] }
                        .as_ref()
                        .expect("violated bound")
                        .reason];
                    for j in 0..self.num_vars() {
                        let a = &self.rows[r][j];
                        if a.is_zero() || j == b {
                            continue;
                        }
                        let bound = if a.is_positive() == increase { &self.upper[j] } else { &self.lower[j] };
                        expl.push(bound.as_ref().expect("blocking bound").reason);
                    }
                    return Some(expl);
                }
            }
        }
    }

    fn lits_of(reasons: Vec<Reason>) -> Vec<Literal> {
        dedup_lits(
            reasons
                .into_iter()
                .filter_map(|r| match r {
                    Reason::Lit(l) => Some(l),
                    Reason::Probe => None,
                })
                .collect(),
        )
    }

    /// Concrete values for every simplex variable: the infinitesimal is
    /// replaced by a positive rational small enough to keep every bound.
    fn concrete(&self) -> Vec<Rational> {
        let mut eps = Rational::one();
        for x in 0..self.num_vars() {
            let v = &self.beta[x];
            if let Some(l) = &self.lower[x] {
                let l = &l.value;
                if l.real < v.real && l.delta > v.delta {
                    eps = eps.min((&v.real - &l.real) / (&l.delta - &v.delta));
                }
            }
            if let Some(u) = &self.upper[x] {
                let u = &u.value;
                if v.real < u.real && v.delta > u.delta {
                    eps = eps.min((&u.real - &v.real) / (&v.delta - &u.delta));
                }
            }
        }
        self.beta.iter().map(|v| v.at(&eps)).collect()
    }

    fn witness_of(&self, point: &[Rational]) -> Witness {
        let mut m = BTreeMap::new();
        for (x, real) in self.real_of_var.iter().enumerate() {
            if let Some(v) = real {
                m.insert(*v, point[x].clone());
            }
        }
        Witness::Lra(m)
    }

    /// Runs simplex under one extra temporary bound; returns a concrete
    /// point on success and the explanation otherwise.
    fn probe(&mut self, x: usize, value: &Rational, below: bool) -> std::result::Result<Vec<Rational>, Vec<Reason>> {
        let mark = self.mark();
        let res = if below {
            self.assert_upper(x, DeltaRational::new(value.clone(), -Rational::one()), Reason::Probe)
        } else {
            self.assert_lower(x, DeltaRational::new(value.clone(), Rational::one()), Reason::Probe)
        };
        let out = match res.or_else(|| self.simplex()) {
            Some(expl) => Err(expl),
            None => Ok(self.concrete()),
        };
        self.backtrack(mark).expect("own mark");
        out
    }
}

impl TheorySolver for LraSolver {
    fn name(&self) -> &'static str {
        "LRA"
    }

    fn register_atom(&mut self, ctx: &Context, atom: AtomId) -> Result<()> {
        self.info(ctx, atom).map(|_| ())
    }

    fn assert_literal(&mut self, ctx: &Context, lit: Literal) -> Result<Option<Vec<Literal>>> {
        let info = self.info(ctx, lit.atom)?;
        self.asserted.push(lit);
        *self.asserted_atoms.entry(lit.atom).or_default() += 1;
        self.undo.push(Undo::Asserted(lit.atom));
        let reason = Reason::Lit(lit);
        let (x, c) = (info.var, info.value);
        let conflict = match (info.rel, lit.positive) {
            (Rel::Le, true) => self.assert_upper(x, DeltaRational::exact(c), reason),
            (Rel::Le, false) => self.assert_lower(x, DeltaRational::new(c, Rational::one()), reason),
            (Rel::Lt, true) => self.assert_upper(x, DeltaRational::new(c, -Rational::one()), reason),
            (Rel::Lt, false) => self.assert_lower(x, DeltaRational::exact(c), reason),
            (Rel::Eq, true) => self
                .assert_upper(x, DeltaRational::exact(c.clone()), reason)
                .or_else(|| self.assert_lower(x, DeltaRational::exact(c), reason)),
            (Rel::Eq, false) => {
                self.diseqs.push((x, c, lit));
                self.undo.push(Undo::Diseq);
                None
            }
        };
        Ok(conflict.map(Self::lits_of))
    }

    fn check(&mut self) -> Option<Vec<Literal>> {
        self.simplex().map(Self::lits_of)
    }

    fn check_full(&mut self) -> TheoryVerdict {
        if let Some(c) = self.check() {
            return TheoryVerdict::Conflict(c);
        }
        let mut point = self.concrete();
        let diseqs = self.diseqs.clone();
        for (i, (x, c, lit)) in diseqs.iter().enumerate() {
            if point[*x] != *c {
                continue;
            }
            let other = match self.probe(*x, c, true) {
                Ok(p) => p,
                Err(below) => match self.probe(*x, c, false) {
                    Ok(p) => p,
                    Err(above) => {
                        let mut expl = Self::lits_of(below);
                        expl.extend(Self::lits_of(above));
                        expl.push(*lit);
                        return TheoryVerdict::Conflict(dedup_lits(expl));
                    }
                },
            };
            // Move from `point` towards `other`: disequality i holds for any
            // positive step, each earlier one fails for at most one step.
            let mut k = 1u32;
            loop {
                let t = Rational::new(BigInt::one(), BigInt::from(k));
                let cand: Vec<Rational> =
                    point.iter().zip(&other).map(|(p, o)| p + &t * (o - p)).collect();
                if diseqs[..=i].iter().all(|(y, d, _)| cand[*y] != *d) {
                    point = cand;
                    break;
                }
                k += 1;
            }
        }
        TheoryVerdict::Sat(self.witness_of(&point))
    }

    fn deductions(&mut self) -> Vec<Deduction> {
        let mut out = Vec::new();
        for (&atom, info) in &self.atoms {
            if self.asserted_atoms.contains_key(&atom) {
                continue;
            }
            let x = info.var;
            let c = DeltaRational::exact(info.value.clone());
            let lo = self.lower[x].as_ref();
            let up = self.upper[x].as_ref();
            let why = |b: &Bound| match b.reason {
                Reason::Lit(l) => l,
                Reason::Probe => unreachable!("probe bounds never outlive a check"),
            };
            let implied = match info.rel {
                Rel::Le => match (lo, up) {
                    (_, Some(u)) if u.value <= c => Some((true, vec![why(u)])),
                    (Some(l), _) if l.value > c => Some((false, vec![why(l)])),
                    _ => None,
                },
                Rel::Lt => match (lo, up) {
                    (_, Some(u)) if u.value < c => Some((true, vec![why(u)])),
                    (Some(l), _) if l.value >= c => Some((false, vec![why(l)])),
                    _ => None,
                },
                Rel::Eq => match (lo, up) {
                    (Some(l), _) if l.value > c => Some((false, vec![why(l)])),
                    (_, Some(u)) if u.value < c => Some((false, vec![why(u)])),
                    (Some(l), Some(u)) if l.value == c && u.value == c => Some((true, dedup_lits(vec![why(l), why(u)]))),
                    _ => None,
                },
            };
            if let Some((positive, explanation)) = implied {
                out.push(Deduction { lit: Literal::new(atom, positive), explanation });
            }
        }
        out
    }

    fn mark(&mut self) -> Mark {
        self.marks.push(self.undo.len());
        Mark(self.marks.len() - 1)
    }

    fn backtrack(&mut self, mark: Mark) -> Result<()> {
        let n = *self.marks.get(mark.0).ok_or(Error::StaleMark(mark.0))?;
        while self.undo.len() > n {
            match self.undo.pop().expect("nonempty") {
                Undo::Lower(x, b) => self.lower[x] = b,
                Undo::Upper(x, b) => self.upper[x] = b,
                Undo::Asserted(a) => {
                    self.asserted.pop();
                    let n = self.asserted_atoms.get_mut(&a).expect("asserted");
                    *n -= 1;
                    if *n == 0 {
                        self.asserted_atoms.remove(&a);
                    }
                }
                Undo::Diseq => {
                    self.diseqs.pop();
                }
            }
        }
        self.marks.truncate(mark.0);
        Ok(())
    }

    fn asserted(&self) -> &[Literal] {
        &self.asserted
    }
}
