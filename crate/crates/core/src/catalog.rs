//! Parametric example games, uniform action grids and seeded random games.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{labels, AnyGame, SymmetricGame};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Chicken,
    #[serde(rename = "counterexample_3x3")]
    Counterexample3x3,
    CournotLinear,
    BertrandDifferentiated,
    PublicGoods,
    CommonPool,
    MinimumEffort,
    Synergistic,
    DiamondSearch,
    PrisonersDilemma,
}

impl Family {
    pub const ALL: [Family; 10] = [
        Family::Chicken,
        Family::Counterexample3x3,
        Family::CournotLinear,
        Family::BertrandDifferentiated,
        Family::PublicGoods,
        Family::CommonPool,
        Family::MinimumEffort,
        Family::Synergistic,
        Family::DiamondSearch,
        Family::PrisonersDilemma,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Chicken => "chicken",
            Family::Counterexample3x3 => "counterexample_3x3",
            Family::CournotLinear => "cournot_linear",
            Family::BertrandDifferentiated => "bertrand_differentiated",
            Family::PublicGoods => "public_goods",
            Family::CommonPool => "common_pool",
            Family::MinimumEffort => "minimum_effort",
            Family::Synergistic => "synergistic",
            Family::DiamondSearch => "diamond_search",
            Family::PrisonersDilemma => "prisoners_dilemma",
        }
    }

    /// Families whose action set is a grid over an interval.
    pub fn is_continuous(self) -> bool {
        !matches!(
            self,
            Family::Chicken | Family::Counterexample3x3 | Family::PrisonersDilemma
        )
    }

    fn default_grid(self, params: &Params) -> Grid {
        let (lo, hi) = match self {
            Family::CournotLinear => (0.0, params.num("b", 10.0)),
            Family::BertrandDifferentiated => (0.0, 20.0),
            Family::CommonPool => (0.0, params.num("e", 10.0)),
            _ => (0.0, 10.0),
        };
        Grid { lo, hi, points: 11 }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::InvalidCatalog(format!("unknown family {s:?}")))
    }
}

/// A parameter value: a number, or a selector name such as `cost = "quadratic"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Number(f64),
    Name(String),
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Params(pub BTreeMap<String, ParamValue>);

impl Params {
    fn num(&self, key: &str, default: f64) -> f64 {
        match self.0.get(key) {
            Some(ParamValue::Number(v)) => *v,
            _ => default,
        }
    }

    fn number(&self, key: &str, default: f64) -> Result<f64> {
        match self.0.get(key) {
            None => Ok(default),
            Some(ParamValue::Number(v)) if v.is_finite() => Ok(*v),
            Some(other) => Err(Error::InvalidParameter {
                name: key.into(),
                reason: format!("expected a finite number, got {other:?}"),
            }),
        }
    }

    fn name(&self, key: &str, default: &str) -> Result<String> {
        match self.0.get(key) {
            None => Ok(default.to_string()),
            Some(ParamValue::Name(s)) => Ok(s.clone()),
            Some(other) => Err(Error::InvalidParameter {
                name: key.into(),
                reason: format!("expected a name, got {other:?}"),
            }),
        }
    }

    pub fn set(&mut self, key: impl Into<String>, value: ParamValue) {
        self.0.insert(key.into(), value);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
}

impl Grid {
    pub fn values(&self) -> Result<Vec<f64>> {
        if self.points == 0 {
            return Err(Error::EmptyGrid);
        }
        if !(self.lo.is_finite() && self.hi.is_finite()) || self.lo > self.hi {
            return Err(Error::InvalidParameter {
                name: "grid".into(),
                reason: format!("need finite lo <= hi, got [{}, {}]", self.lo, self.hi),
            });
        }
        if self.points == 1 {
            return Ok(vec![self.lo]);
        }
        let step = (self.hi - self.lo) / (self.points - 1) as f64;
        Ok((0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    self.hi
                } else {
                    self.lo + step * i as f64
                }
            })
            .collect())
    }
}

/// Cost of an own action: zero, `c x`, or `c x^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Cost {
    Zero,
    Linear(f64),
    Quadratic(f64),
}

impl Cost {
    fn from_params(params: &Params, default_kind: &str, default_c: f64) -> Result<Cost> {
        let c = params.number("c", default_c)?;
        match params.name("cost", default_kind)?.as_str() {
            "zero" => Ok(Cost::Zero),
            "linear" => Ok(Cost::Linear(c)),
            "quadratic" => Ok(Cost::Quadratic(c)),
            other => Err(Error::InvalidParameter {
                name: "cost".into(),
                reason: format!("unknown cost family {other:?} (zero, linear, quadratic)"),
            }),
        }
    }

    fn at(self, x: f64) -> f64 {
        match self {
            Cost::Zero => 0.0,
            Cost::Linear(c) => c * x,
            Cost::Quadratic(c) => c * x * x,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogSpec {
    pub family: Family,
    #[serde(default)]
    pub params: Params,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl CatalogSpec {
    pub fn new(family: Family) -> Self {
        CatalogSpec {
            family,
            params: Params::default(),
            grid: None,
            seed: None,
        }
    }

    pub fn param(mut self, key: &str, value: f64) -> Self {
        self.params.set(key, ParamValue::Number(value));
        self
    }

    pub fn selector(mut self, key: &str, value: &str) -> Self {
        self.params.set(key, ParamValue::Name(value.to_string()));
        self
    }

    pub fn grid(mut self, lo: f64, hi: f64, points: usize) -> Self {
        self.grid = Some(Grid { lo, hi, points });
        self
    }

    /// The grid in effect: the explicit one, or the family default.
    pub fn effective_grid(&self) -> Grid {
        self.grid
            .unwrap_or_else(|| self.family.default_grid(&self.params))
    }

    /// Parses `cournot_linear?b=10&points=11` (an optional `catalog:` prefix
    /// is accepted). `lo`, `hi` and `points` set the grid and `seed` the seed;
    /// anything else is a parameter, numeric when it parses as a number.
    pub fn parse_shorthand(text: &str) -> Result<Self> {
        let text = text.strip_prefix("catalog:").unwrap_or(text);
        let (family, query) = text.split_once('?').unwrap_or((text, ""));
        let mut spec = CatalogSpec::new(family.parse()?);
        let mut grid = None::<(Option<f64>, Option<f64>, Option<usize>)>;
        for pair in query.split('&').filter(|p| !p.is_empty()) {
            let (key, value) = pair.split_once('=').ok_or_else(|| {
                Error::InvalidCatalog(format!("expected key=value, got {pair:?}"))
            })?;
            let bad = |what: &str| Error::InvalidParameter {
                name: key.into(),
                reason: format!("expected {what}, got {value:?}"),
            };
            let g = grid.get_or_insert((None, None, None));
            match key {
                "lo" => g.0 = Some(value.parse().map_err(|_| bad("a number"))?),
                "hi" => g.1 = Some(value.parse().map_err(|_| bad("a number"))?),
                "points" => g.2 = Some(value.parse().map_err(|_| bad("a point count"))?),
                "seed" => spec.seed = Some(value.parse().map_err(|_| bad("an integer seed"))?),
                _ => {
                    let v = match value.parse::<f64>() {
                        Ok(v) => ParamValue::Number(v),
                        Err(_) => ParamValue::Name(value.to_string()),
                    };
                    spec.params.set(key, v);
                }
            }
        }
        if let Some((lo, hi, points)) = grid {
            if lo.is_some() || hi.is_some() || points.is_some() {
                let d = spec.family.default_grid(&spec.params);
                spec.grid = Some(Grid {
                    lo: lo.unwrap_or(d.lo),
                    hi: hi.unwrap_or(d.hi),
                    points: points.unwrap_or(d.points),
                });
            }
        }
        Ok(spec)
    }
}

fn grid_labels(values: &[f64]) -> Vec<String> {
    let short: Vec<String> = values
        .iter()
        .map(|v| {
            let s = format!("{v:.6}");
            let s = s.trim_end_matches('0').trim_end_matches('.');
            if s == "-0" {
                "0".to_string()
            } else {
                s.to_string()
            }
        })
        .collect();
    let mut sorted = short.clone();
    sorted.sort();
    sorted.dedup();
    if sorted.len() == short.len() {
        short
    } else {
        values.iter().map(|v| format!("{v:?}")).collect()
    }
}

fn require(cond: bool, name: &str, reason: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: name.into(),
            reason: reason.into(),
        })
    }
}

fn continuous_game(spec: &CatalogSpec, payoff: impl Fn(f64, f64) -> f64) -> Result<AnyGame> {
    let grid = spec.effective_grid();
    let xs = grid.values()?;
    let name = format!("{}", spec.family);
    Ok(AnyGame::Float(SymmetricGame::from_fn(
        name,
        grid_labels(&xs),
        |i, j| payoff(xs[i], xs[j]),
    )?))
}

/// Builds the game described by `spec`.
pub fn build_catalog_game(spec: &CatalogSpec) -> Result<AnyGame> {
    let p = &spec.params;
    match spec.family {
        Family::Chicken => Ok(chicken().into()),
        Family::Counterexample3x3 => Ok(counterexample_3x3().into()),
        Family::PrisonersDilemma => {
            let r = p.number("reward", 3.0)?;
            let t = p.number("temptation", 5.0)?;
            let s = p.number("sucker", 0.0)?;
            let q = p.number("punishment", 1.0)?;
            let rows = vec![vec![r, s], vec![t, q]];
            let actions = labels(&["cooperate", "defect"]);
            let integral = rows
                .iter()
                .flatten()
                .all(|v| v.fract() == 0.0 && v.abs() < 1e12);
            if integral {
                let rows = rows
                    .into_iter()
                    .map(|r| r.into_iter().map(|v| v as i64).collect())
                    .collect();
                Ok(SymmetricGame::new("prisoners_dilemma", actions, rows)?.into())
            } else {
                Ok(SymmetricGame::new("prisoners_dilemma", actions, rows)?.into())
            }
        }
        Family::CournotLinear => {
            let b = p.number("b", 10.0)?;
            require(b > 0.0, "b", "must be positive")?;
            let cost = Cost::from_params(p, "zero", 0.0)?;
            continuous_game(spec, |x, y| x * (b - x - y) - cost.at(x))
        }
        Family::BertrandDifferentiated => {
            let a = p.number("a", 10.0)?;
            let b = p.number("b", 0.25)?;
            let c = p.number("c", 1.0)?;
            require(a > 0.0, "a", "must be positive")?;
            require((0.0..0.5).contains(&b), "b", "must lie in [0, 1/2)")?;
            continuous_game(spec, |x, y| (x - c) * (a + b * y - 0.5 * x))
        }
        Family::PublicGoods => {
            let cost = Cost::from_params(p, "linear", 1.0)?;
            let m = p.number("m", 0.75)?;
            match p.name("benefit", "linear")?.as_str() {
                "linear" => continuous_game(spec, |x, y| m * (x + y) - cost.at(x)),
                "sqrt" => {
                    require(
                        spec.effective_grid().lo >= 0.0,
                        "grid",
                        "sqrt benefit needs lo >= 0",
                    )?;
                    continuous_game(spec, |x, y| m * (x + y).sqrt() - cost.at(x))
                }
                other => Err(Error::InvalidParameter {
                    name: "benefit".into(),
                    reason: format!("unknown benefit {other:?} (linear, sqrt)"),
                }),
            }
        }
        Family::CommonPool => {
            let (e, a, b, c) = cpr_params(spec)?;
            continuous_game(spec, move |x, y| cpr_payoff(e, a, b, c, x, y))
        }
        Family::MinimumEffort => {
            let cost = Cost::from_params(p, "linear", 0.5)?;
            continuous_game(spec, |x, y| x.min(y) - cost.at(x))
        }
        Family::Synergistic => {
            let c = p.number("c", 4.0)?;
            require(c > 0.0, "c", "must be positive")?;
            require(
                spec.effective_grid().lo >= 0.0,
                "grid",
                "efforts must be non-negative",
            )?;
            continuous_game(spec, |x, y| x * (c + y - x))
        }
        Family::DiamondSearch => {
            let alpha = p.number("alpha", 0.5)?;
            require(alpha > 0.0, "alpha", "must be positive")?;
            let cost = Cost::from_params(p, "quadratic", 1.0)?;
            continuous_game(spec, |x, y| alpha * x * y - cost.at(x))
        }
    }
}

fn cpr_params(spec: &CatalogSpec) -> Result<(f64, f64, f64, f64)> {
    let p = &spec.params;
    let e = p.number("e", 10.0)?;
    let a = p.number("a", 4.0)?;
    let b = p.number("b", 0.1)?;
    let c = p.number("c", 1.0)?;
    require(e > 0.0, "e", "must be positive")?;
    require(c > 0.0, "c", "must be positive")?;
    require(a > 0.0, "a", "must be positive")?;
    require(b > 0.0, "b", "must be positive")?;
    let grid = spec.effective_grid();
    require(
        grid.lo >= 0.0 && grid.hi <= e,
        "grid",
        "investments must lie in [0, e]",
    )?;
    Ok((e, a, b, c))
}

/// Outside option `c (e - x)` plus a pro-rata share of the pool's return;
/// the whole endowment goes outside when nobody invests.
fn cpr_payoff(e: f64, a: f64, b: f64, c: f64, x: f64, y: f64) -> f64 {
    let total = x + y;
    if total > 0.0 {
        c * (e - x) + x / total * (a * total - b * total * total)
    } else {
        c * e
    }
}

/// Compares the common pool game's relative payoffs with the separable
/// closed form `h(x) - h(y)`, `h(x) = c (e - x) + a x - b x^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedFormCheck {
    /// Largest deviation over pairs with both investments positive.
    pub interior_max_error: f64,
    /// Largest deviation over pairs where at least one investment is zero,
    /// `None` when the grid has no such pair.
    pub boundary_max_error: Option<f64>,
    /// Whether the boundary deviation is within tolerance.
    pub boundary_holds: Option<bool>,
}

pub fn cpr_closed_form_check(spec: &CatalogSpec, epsilon: f64) -> Result<ClosedFormCheck> {
    if spec.family != Family::CommonPool {
        return Err(Error::InvalidCatalog(format!(
            "closed-form check applies to common_pool, not {}",
            spec.family
        )));
    }
    let (e, a, b, c) = cpr_params(spec)?;
    let xs = spec.effective_grid().values()?;
    let h = |x: f64| c * (e - x) + a * x - b * x * x;
    let mut interior = 0.0f64;
    let mut boundary: Option<f64> = None;
    let mut scale = 1.0f64;
    for &x in &xs {
        for &y in &xs {
            let delta = cpr_payoff(e, a, b, c, x, y) - cpr_payoff(e, a, b, c, y, x);
            scale = scale.max(delta.abs());
            let err = (delta - (h(x) - h(y))).abs();
            if x > 0.0 && y > 0.0 {
                interior = interior.max(err);
            } else {
                boundary = Some(boundary.unwrap_or(0.0).max(err));
            }
        }
    }
    Ok(ClosedFormCheck {
        interior_max_error: interior,
        boundary_max_error: boundary,
        boundary_holds: boundary.map(|err| err <= epsilon * scale),
    })
}

pub fn chicken() -> SymmetricGame<i64> {
    SymmetricGame::new(
        "chicken",
        labels(&["swerve", "straight"]),
        vec![vec![3, 1], vec![4, 0]],
    )
    .expect("static game is valid")
}

/// A 3x3 game without an exact potential in which tit-for-tat can be pumped.
pub fn counterexample_3x3() -> SymmetricGame<i64> {
    SymmetricGame::new(
        "counterexample_3x3",
        labels(&["A", "B", "C"]),
        vec![vec![0, 0, -1], vec![-1, 0, 0], vec![0, 10, 0]],
    )
    .expect("static game is valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RandomMode {
    /// Independent uniform payoffs.
    Unrestricted,
    /// `f(x) + g(y) + a(x, y)` with `a` symmetric.
    ExactPotential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomGameConfig {
    pub n: usize,
    pub mode: RandomMode,
    pub lo: i64,
    pub hi: i64,
    pub seed: u64,
    /// Include the opponent-action term `g` (exact-potential mode).
    pub opponent_term: bool,
    /// Include the symmetric interaction term `a` (exact-potential mode).
    pub symmetric_term: bool,
}

impl RandomGameConfig {
    pub fn new(n: usize, mode: RandomMode, seed: u64) -> Self {
        RandomGameConfig {
            n,
            mode,
            lo: -9,
            hi: 9,
            seed,
            opponent_term: true,
            symmetric_term: true,
        }
    }
}

/// Deterministic per seed.
pub fn generate_random_game(config: &RandomGameConfig) -> Result<SymmetricGame<i64>> {
    let n = config.n;
    if n == 0 {
        return Err(Error::Empty);
    }
    if config.lo > config.hi {
        return Err(Error::InvalidParameter {
            name: "range".into(),
            reason: format!("lo {} exceeds hi {}", config.lo, config.hi),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut draw = |on: bool| {
        if on {
            rng.gen_range(config.lo..=config.hi)
        } else {
            0
        }
    };
    let actions: Vec<String> = (0..n).map(|i| format!("a{i}")).collect();
    let name = format!("random_{:?}_{}", config.mode, config.seed).to_lowercase();
    match config.mode {
        RandomMode::Unrestricted => {
            let values: Vec<i64> = (0..n * n).map(|_| draw(true)).collect();
            SymmetricGame::from_fn(name, actions, |x, y| values[x * n + y])
        }
        RandomMode::ExactPotential => {
            let f: Vec<i64> = (0..n).map(|_| draw(true)).collect();
            let g: Vec<i64> = (0..n).map(|_| draw(config.opponent_term)).collect();
            let mut a = vec![0i64; n * n];
            for x in 0..n {
                for y in x..n {
                    let v = draw(config.symmetric_term);
                    a[x * n + y] = v;
                    a[y * n + x] = v;
                }
            }
            SymmetricGame::from_fn(name, actions, |x, y| f[x] + g[y] + a[x * n + y])
        }
    }
}
