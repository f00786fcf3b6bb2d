//! Named maturity-randomized quantities, selectable at runtime.

use crate::error::Result;
use crate::model::{DownOutStepSpec, HejdModel};
use crate::mr::{eval_eep_split_mr, eval_european_mr, solve_american_from, solve_european_mr};
use crate::mr::{MrAmericanSolution, MrEuropeanSolution};

/// Solutions at one randomization intensity.
#[derive(Debug, Clone)]
pub struct MrPoint {
    pub european: MrEuropeanSolution,
    pub american: Option<MrAmericanSolution>,
}

impl MrPoint {
    pub fn solve(model: &HejdModel, spec: &DownOutStepSpec, theta: f64, american: bool) -> Result<Self> {
        let european = solve_european_mr(model, spec, theta)?;
        if american {
            let am = solve_american_from(european.clone())?;
            Ok(MrPoint { european, american: Some(am) })
        } else {
            Ok(MrPoint { european, american: None })
        }
    }

    fn american(&self) -> &MrAmericanSolution {
        self.american
            .as_ref()
            .expect("quantity requires the American solution")
    }
}

/// How American-family quantities are evaluated above the free boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Piecewise definition: exercise values at and above the boundary.
    Exact,
    /// Continuation-region formulas used at every spot.
    Continued,
}

/// A scalar functional of the maturity-randomized solution.
pub trait MrQuantity: Send + Sync {
    fn name(&self) -> &'static str;
    fn needs_american(&self) -> bool;
    fn eval(&self, point: &MrPoint, x: f64, regime: Regime) -> f64;
}

struct Euro;
struct Amer;
struct Eep;
struct EepDiffusion;
struct EepJump;

impl MrQuantity for Euro {
    fn name(&self) -> &'static str {
        "euro"
    }
    fn needs_american(&self) -> bool {
        false
    }
    fn eval(&self, point: &MrPoint, x: f64, _regime: Regime) -> f64 {
        eval_european_mr(&point.european, x)
    }
}

impl MrQuantity for Amer {
    fn name(&self) -> &'static str {
        "amer"
    }
    fn needs_american(&self) -> bool {
        true
    }
    fn eval(&self, point: &MrPoint, x: f64, regime: Regime) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        match regime {
            Regime::Exact => point.american().price(x),
            Regime::Continued => {
                eval_european_mr(&point.european, x) + point.american().continuation_premium(x).0
            }
        }
    }
}

impl MrQuantity for Eep {
    fn name(&self) -> &'static str {
        "eep"
    }
    fn needs_american(&self) -> bool {
        true
    }
    fn eval(&self, point: &MrPoint, x: f64, regime: Regime) -> f64 {
        split(point.american(), x, regime).0
    }
}

impl MrQuantity for EepDiffusion {
    fn name(&self) -> &'static str {
        "eep_diffusion"
    }
    fn needs_american(&self) -> bool {
        true
    }
    fn eval(&self, point: &MrPoint, x: f64, regime: Regime) -> f64 {
        split(point.american(), x, regime).1
    }
}

impl MrQuantity for EepJump {
    fn name(&self) -> &'static str {
        "eep_jump"
    }
    fn needs_american(&self) -> bool {
        true
    }
    fn eval(&self, point: &MrPoint, x: f64, regime: Regime) -> f64 {
        split(point.american(), x, regime).2
    }
}

fn split(am: &MrAmericanSolution, x: f64, regime: Regime) -> (f64, f64, f64) {
    match regime {
        Regime::Exact => eval_eep_split_mr(am, x),
        Regime::Continued => am.continuation_premium(x),
    }
}

/// Quantities registered by name.
pub struct QuantityRegistry {
    entries: Vec<Box<dyn MrQuantity>>,
}

impl QuantityRegistry {
    pub fn empty() -> Self {
        QuantityRegistry { entries: Vec::new() }
    }

    /// Registry holding `euro`, `amer`, `eep`, `eep_diffusion` and `eep_jump`.
    pub fn standard() -> Self {
        let mut reg = Self::empty();
        reg.register(Box::new(Euro));
        reg.register(Box::new(Amer));
        reg.register(Box::new(Eep));
        reg.register(Box::new(EepDiffusion));
        reg.register(Box::new(EepJump));
        reg
    }

    /// Adds a quantity, replacing any previous entry with the same name.
    pub fn register(&mut self, q: Box<dyn MrQuantity>) {
        self.entries.retain(|e| e.name() != q.name());
        self.entries.push(q);
    }

    pub fn get(&self, name: &str) -> Option<&dyn MrQuantity> {
        self.entries.iter().find(|e| e.name() == name).map(|b| b.as_ref())
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|e| e.name()).collect()
    }
}

impl Default for QuantityRegistry {
    fn default() -> Self {
        Self::standard()
    }
}
