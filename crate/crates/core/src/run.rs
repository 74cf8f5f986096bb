//! Evaluation of run configurations into result documents.

use std::time::Instant;

use crate::bodies::{QBody, StarBody};
use crate::config::{JOptSettings, Quantity, QuantityResult, ResultDocument, RunConfig, SweepAxis, SweepRow};
use crate::error::{Error, Result};
use crate::functionals::{
    cap_ball_closed_form, cap_lower, cap_p_upper_radial, cap_upper, phi, profile_factor, profile_optimize_j, sp_surface,
    Rules,
};
use crate::projection::{d_np, h_projection_radial, MatrixDirection, ProjectionBody};
use crate::quadrature::{Estimate, RuleSpec};

/// Resolved inputs for one evaluation pass.
struct Inputs {
    body: Option<StarBody>,
    q: Option<QBody>,
    p: f64,
    n: usize,
    rules: Rules,
}

impl Inputs {
    fn from_config(config: &RunConfig) -> Result<Self> {
        Ok(Inputs {
            body: config.body.as_ref().map(|b| b.build()).transpose()?,
            q: config.q.clone(),
            p: config.p,
            n: config.dim_n()?,
            rules: Rules::new(config.effective_inner(), config.effective_outer()),
        })
    }

    fn body(&self) -> Result<&StarBody> {
        self.body.as_ref().ok_or_else(|| Error::input("quantity needs a body"))
    }

    fn q(&self) -> Result<&QBody> {
        self.q.as_ref().ok_or_else(|| Error::input("quantity needs q"))
    }
}

/// Evaluates every requested quantity; a sweep config produces rows instead.
pub fn compute(config: &RunConfig) -> Result<ResultDocument> {
    config.validate()?;
    let command = if config.sweep.is_some() { "sweep" } else { "compute" };
    let mut doc = ResultDocument::new(command, Some(config.clone()));
    match &config.sweep {
        None => doc.results = evaluate(config, &Inputs::from_config(config)?)?,
        Some(sweep) => {
            for &value in &sweep.values {
                let inputs = swept_inputs(config, sweep.axis, value)?;
                doc.rows.push(SweepRow { axis: sweep.axis, value, results: evaluate(config, &inputs)? });
            }
        }
    }
    Ok(doc)
}

fn swept_inputs(config: &RunConfig, axis: SweepAxis, value: f64) -> Result<Inputs> {
    let mut inputs = Inputs::from_config(config)?;
    match axis {
        SweepAxis::P => {
            crate::projection::check_p(value)?;
            inputs.p = value;
        }
        SweepAxis::Tau => inputs.q = Some(QBody::tau_segment(value, inputs.p)?),
        SweepAxis::A => inputs.body = inputs.body.map(|b| b.scaled(value)).transpose()?,
        SweepAxis::B => inputs.q = inputs.q.map(|q| q.scaled(value)).transpose()?,
        SweepAxis::Level => {
            if value < 1.0 || value.fract() != 0.0 || value > 12.0 {
                return Err(Error::input(format!("rule level must be an integer in 1..=12, got {value}")));
            }
            let level = value as u32;
            let relevel = |r: &RuleSpec| RuleSpec { level, ..r.clone() };
            inputs.rules = Rules::new(relevel(&inputs.rules.inner), relevel(&inputs.rules.outer));
        }
    }
    Ok(inputs)
}

fn evaluate(config: &RunConfig, inputs: &Inputs) -> Result<Vec<QuantityResult>> {
    let mut out = Vec::new();
    for &quantity in &config.quantities {
        match quantity {
            Quantity::HProj | Quantity::HProjRadial => {
                let k = inputs.body()?;
                let q = inputs.q()?;
                let projection = if quantity == Quantity::HProj {
                    Some(ProjectionBody::new(k, q, inputs.p, &inputs.rules.inner)?)
                } else {
                    None
                };
                for entries in &config.directions {
                    let start = Instant::now();
                    let u = MatrixDirection::normalized(inputs.n, q.dim(), entries.clone())?;
                    let est = match &projection {
                        Some(body) => body.support(&u.entries)?,
                        None => h_projection_radial(k, q, inputs.p, &u, &inputs.rules.inner)?,
                    };
                    let mut r = QuantityResult::from_estimate(quantity, &est, start.elapsed().as_secs_f64());
                    r.direction = Some(u.entries);
                    out.push(r);
                }
            }
            _ => {
                let start = Instant::now();
                let est = scalar(quantity, inputs, config.j_opt.unwrap_or_default())?;
                out.push(QuantityResult::from_estimate(quantity, &est, start.elapsed().as_secs_f64()));
            }
        }
    }
    Ok(out)
}

fn scalar(quantity: Quantity, inputs: &Inputs, j_opt: JOptSettings) -> Result<Estimate> {
    let (n, p, rules) = (inputs.n, inputs.p, &inputs.rules);
    match quantity {
        Quantity::Volume => Ok(inputs.body()?.volume()),
        Quantity::Sp => sp_surface(inputs.body()?, p, &rules.inner),
        Quantity::Phi => phi(inputs.body()?, inputs.q()?, p, rules),
        Quantity::DNp => d_np(inputs.q()?, n, p, &rules.inner, &rules.outer),
        Quantity::CapBall => cap_ball_closed_form(n, inputs.q()?, p, rules),
        Quantity::CapLower => cap_lower(inputs.body()?, inputs.q()?, p, rules),
        Quantity::CapUpper => cap_upper(inputs.body()?, inputs.q()?, p, rules),
        Quantity::CapPUpper => cap_p_upper_radial(inputs.body()?, p, &rules.inner),
        Quantity::JStar => Ok(Estimate::exact(profile_factor(n, p)?, "closed form")),
        Quantity::JOpt => {
            let fit = profile_optimize_j(n, p, j_opt.grid_size, j_opt.s_max)?;
            Ok(Estimate::new(fit.j, fit.tail_bound, format!("discrete profile, {} intervals", j_opt.grid_size)))
        }
        Quantity::HProj | Quantity::HProjRadial => unreachable!("directional quantities are handled by the caller"),
    }
}
