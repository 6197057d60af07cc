use crate::config::{command, require_seed, Common};
use crate::output::{Cell, Report};
use crate::suites;
use anyhow::{bail, ensure, Context, Result};
use clap::Args;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use wickgraph::activation::Activation;
use wickgraph::kernels::{fc_moments, gp_kernel_recursive, gp_kernel_via_trees, ntk_limit, TREE_PAIR_CAP};
use wickgraph::montecarlo::{
    empirical_ntk_mc, gp_covariance_mc, jacobian_moments_mc, rate_scan, Distribution, JacobianMomentStat, Law,
    NetworkSpec,
};

fn activations(spec: &[String], depth: usize, linear: bool) -> Result<Vec<Activation>> {
    if linear {
        return Ok(vec![Activation::linear(); depth]);
    }
    let parsed: Vec<Activation> = spec.iter().map(|s| s.parse()).collect::<wickgraph::Result<_>>()?;
    match parsed.len() {
        1 => Ok(vec![parsed[0].clone(); depth]),
        n if n == depth => Ok(parsed),
        n => bail!("{n} activations for depth {depth}"),
    }
}

fn network_law(distribution: &str, sparsity: Option<f64>) -> Result<Law> {
    let d: Distribution = distribution.parse()?;
    ensure!(d != Distribution::ComplexGaussian, "complex weights are not supported for networks");
    let law = Law { distribution: d, sparsity };
    law.validate()?;
    Ok(law)
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct JacobianTable {
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
    /// One activation for every layer, or one per layer (`relu`, `linear`, `poly:a0,a1,...`).
    #[arg(long)]
    pub activation: Option<Vec<String>>,
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub k_max: Option<usize>,
    /// Limit of `<x,x>/N_0`.
    #[arg(long)]
    pub x2: Option<f64>,
    /// Add a Monte Carlo column at x = all-ones.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub mc: Option<bool>,
    #[arg(long)]
    pub width: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub distribution: Option<String>,
    #[arg(long)]
    pub sparsity: Option<f64>,
}
command!(JacobianTable, "jacobian-table");

impl JacobianTable {
    pub fn fill_defaults(&mut self) {
        self.activation.get_or_insert_with(|| vec!["relu".into()]);
        self.depth.get_or_insert(3);
        self.k_max.get_or_insert(4);
        self.x2.get_or_insert(1.0);
        self.mc.get_or_insert(false);
        if self.mc == Some(true) {
            self.width.get_or_insert(500);
            self.trials.get_or_insert(200);
            self.distribution.get_or_insert_with(|| "gaussian".into());
        }
    }

    pub fn run(&self) -> Result<Report> {
        let (depth, k_max, x2) = (self.depth.unwrap(), self.k_max.unwrap(), self.x2.unwrap());
        ensure!(depth >= 1 && k_max >= 1, "depth and k-max must be positive");
        let acts = activations(self.activation.as_deref().unwrap(), depth, false)?;
        let exact = fc_moments::<BigRational>(k_max, depth, x2, &acts)?;
        let float = fc_moments::<f64>(k_max, depth, x2, &acts)?;
        let mc = if self.mc == Some(true) {
            ensure!(x2 == 1.0, "the Monte Carlo column uses x = all-ones, so x2 must be 1");
            let seed = require_seed(&self.common, "--mc")?;
            let law = network_law(self.distribution.as_deref().unwrap(), self.sparsity)?;
            Some(jacobian_moments_mc(depth, k_max, self.width.unwrap(), self.trials.unwrap(), &acts, &law, seed)?)
        } else {
            None
        };
        let mut r = Report::new(&["stat", "k", "L", "N", "trials", "mean", "stderr", "theory", "z", "theory_rational"]);
        for l in 1..=depth {
            for k in 1..=k_max {
                let theory = float[k - 1][l];
                let est = mc.as_ref().map(|m| m[l - 1][k - 1]);
                r.push(vec![
                    "m".into(),
                    k.into(),
                    l.into(),
                    est.map(|_| self.width.unwrap()).into(),
                    est.map(|e| e.trials).into(),
                    est.map(|e| e.mean).into(),
                    est.map(|e| e.stderr).into(),
                    theory.into(),
                    est.map(|e| e.z(theory)).into(),
                    exact[k - 1][l].to_string().into(),
                ]);
            }
        }
        Ok(r)
    }
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct Rate {
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
    #[arg(long)]
    pub activation: Option<Vec<String>>,
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub k_max: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub widths: Option<Vec<usize>>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub distribution: Option<String>,
    #[arg(long)]
    pub sparsity: Option<f64>,
}
command!(Rate, "rate");

impl Rate {
    pub fn fill_defaults(&mut self) {
        self.activation.get_or_insert_with(|| vec!["relu".into()]);
        self.depth.get_or_insert(2);
        self.k_max.get_or_insert(4);
        self.widths.get_or_insert_with(|| vec![50, 100, 250, 500, 700, 1000]);
        self.trials.get_or_insert(100);
        self.distribution.get_or_insert_with(|| "gaussian".into());
    }

    pub fn run(&self) -> Result<Report> {
        let seed = require_seed(&self.common, "rate")?;
        let depth = self.depth.unwrap();
        let acts = activations(self.activation.as_deref().unwrap(), depth, false)?;
        let law = network_law(self.distribution.as_deref().unwrap(), self.sparsity)?;
        let stat = JacobianMomentStat::new(depth, self.k_max.unwrap(), acts, law)?;
        let trials = self.trials.unwrap();
        let scans = rate_scan(&stat, self.widths.as_deref().unwrap(), trials, seed)?;
        let mut r = Report::new(&["kind", "k", "N", "trials", "value", "stderr"]);
        for (k, scan) in scans.iter().enumerate() {
            for p in &scan.points {
                r.push(vec!["mse".into(), (k + 1).into(), p.n.into(), trials.into(), p.mse.into(), p.mse_stderr.into()]);
            }
        }
        for (k, scan) in scans.iter().enumerate() {
            r.push(vec!["slope".into(), (k + 1).into(), Cell::Empty, Cell::Empty, scan.slope.into(), Cell::Empty]);
            r.push(vec!["intercept".into(), (k + 1).into(), Cell::Empty, Cell::Empty, scan.intercept.into(), Cell::Empty]);
        }
        Ok(r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WickMode {
    Real,
    Complex,
    Mixed,
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct WickVerify {
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
    /// Number of random graphs.
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub max_vertices: Option<usize>,
    #[arg(long)]
    pub max_dim: Option<usize>,
    #[arg(long)]
    pub max_random: Option<usize>,
    #[arg(long, value_enum)]
    pub mode: Option<WickMode>,
}
command!(WickVerify, "wick-verify");

impl WickVerify {
    pub fn fill_defaults(&mut self) {
        self.count.get_or_insert(50);
        self.max_vertices.get_or_insert(5);
        self.max_dim.get_or_insert(3);
        self.max_random.get_or_insert(6);
        self.mode.get_or_insert(WickMode::Mixed);
    }

    pub fn run(&self) -> Result<Report> {
        let seed = require_seed(&self.common, "wick-verify")?;
        let (nv, dim, nr) = (self.max_vertices.unwrap(), self.max_dim.unwrap(), self.max_random.unwrap());
        ensure!(nv >= 1 && dim >= 1, "max-vertices and max-dim must be positive");
        let mut r = Report::checks();
        for i in 0..self.count.unwrap() {
            let complex = match self.mode.unwrap() {
                WickMode::Real => false,
                WickMode::Complex => true,
                WickMode::Mixed => i % 2 == 1,
            };
            let g = suites::random_wick_graph(seed.wrapping_add(i as u64), nv, dim, nr, complex);
            suites::wick_check(&mut r, &format!("graph_{i}"), &g, complex)?;
        }
        suites::trace_moment_checks(&mut r)?;
        Ok(r)
    }
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct Gp {
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub activation: Option<Vec<String>>,
    /// Use linear activations on every layer.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub linear: Option<bool>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub y: Option<Vec<f64>>,
    /// Compare with output covariances of random networks.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub mc: Option<bool>,
    #[arg(long)]
    pub width: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub distribution: Option<String>,
    #[arg(long)]
    pub sparsity: Option<f64>,
}
command!(Gp, "gp");

fn default_inputs(x: &mut Option<Vec<f64>>, y: &mut Option<Vec<f64>>) {
    x.get_or_insert_with(|| vec![0.6, -0.3, 0.8]);
    y.get_or_insert_with(|| vec![0.5, -0.1, 0.7]);
}

impl Gp {
    pub fn fill_defaults(&mut self) {
        self.depth.get_or_insert(2);
        self.linear.get_or_insert(false);
        let default = if self.linear == Some(true) { "linear" } else { "poly:0,1,1" };
        self.activation.get_or_insert_with(|| vec![default.into()]);
        default_inputs(&mut self.x, &mut self.y);
        self.mc.get_or_insert(false);
        if self.mc == Some(true) {
            self.width.get_or_insert(500);
            self.trials.get_or_insert(200);
            self.distribution.get_or_insert_with(|| "gaussian".into());
        }
    }

    pub fn run(&self) -> Result<Report> {
        let l = self.depth.unwrap();
        let acts = activations(self.activation.as_deref().unwrap(), l, self.linear.unwrap())?;
        let (x, y) = (self.x.as_deref().unwrap(), self.y.as_deref().unwrap());
        ensure!(x.len() == y.len() && !x.is_empty(), "x and y must have the same positive length");
        let k = gp_kernel_recursive(l, x, y, &acts)?;
        let ky = gp_kernel_recursive(l, y, x, &acts)?;
        let mut r = Report::checks();
        r.check("symmetry", ky, k, 1e-12 * (1.0 + k.abs()), "K(y,x) against K(x,y)");
        if acts.iter().all(|a| a.coeffs().is_ok()) {
            let t = gp_kernel_via_trees(l, x, y, &acts, TREE_PAIR_CAP)?;
            r.check("route_equivalence", t, k, 1e-10 * k.abs().max(1.0), "tree pairings against the recursion");
        }
        if self.linear == Some(true) {
            r.check("linear_closed_form", k, dot(x, y), 1e-12 * (1.0 + k.abs()), "<x,y>");
        }
        if self.mc == Some(true) {
            let seed = require_seed(&self.common, "--mc")?;
            let law = network_law(self.distribution.as_deref().unwrap(), self.sparsity)?;
            let spec = NetworkSpec::gp_limit(x.len(), self.width.unwrap(), 2, acts.clone(), law);
            let inputs = vec![x.to_vec(), y.to_vec()];
            let cov = gp_covariance_mc(&spec, &inputs, self.trials.unwrap(), seed)?;
            let names = ["x", "y"];
            for a in 0..2 {
                for b in a..2 {
                    let target = gp_kernel_recursive(l, &inputs[a], &inputs[b], &acts)?;
                    let e = cov.cov[a][b];
                    r.check(format!("mc_cov_{}{}", names[a], names[b]), e.mean, target, 5.0 * e.stderr, "5 stderr");
                }
                let e = cov.cross[a];
                r.check(format!("mc_cross_{}", names[a]), e.mean, 0.0, 5.0 * e.stderr, "5 stderr");
            }
        }
        Ok(r)
    }
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct Ntk {
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub activation: Option<Vec<String>>,
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub linear: Option<bool>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub x: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub y: Option<Vec<f64>>,
    /// Compare with the empirical NTK of random networks.
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub mc: Option<bool>,
    #[arg(long)]
    pub width: Option<usize>,
    #[arg(long)]
    pub n_out: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub distribution: Option<String>,
    #[arg(long)]
    pub sparsity: Option<f64>,
}
command!(Ntk, "ntk");

impl Ntk {
    pub fn fill_defaults(&mut self) {
        self.depth.get_or_insert(1);
        self.linear.get_or_insert(false);
        let default = if self.linear == Some(true) { "linear" } else { "poly:0,1,1" };
        self.activation.get_or_insert_with(|| vec![default.into()]);
        default_inputs(&mut self.x, &mut self.y);
        self.mc.get_or_insert(false);
        if self.mc == Some(true) {
            self.width.get_or_insert(500);
            self.n_out.get_or_insert(2);
            self.trials.get_or_insert(50);
            self.distribution.get_or_insert_with(|| "gaussian".into());
        }
    }

    pub fn run(&self) -> Result<Report> {
        let l = self.depth.unwrap();
        let acts = activations(self.activation.as_deref().unwrap(), l, self.linear.unwrap())?;
        let (x, y) = (self.x.as_deref().unwrap(), self.y.as_deref().unwrap());
        ensure!(x.len() == y.len() && !x.is_empty(), "x and y must have the same positive length");
        let theta = ntk_limit(l, x, y, &acts)?;
        let mut r = Report::checks();
        r.check("symmetry", ntk_limit(l, y, x, &acts)?, theta, 1e-12 * (1.0 + theta.abs()), "Theta(y,x) against Theta(x,y)");
        if self.linear == Some(true) {
            let expected = (l as f64 + 1.0) * dot(x, y);
            r.check("linear_closed_form", theta, expected, 1e-12 * (1.0 + expected.abs()), "(L+1)<x,y>");
        }
        if self.mc == Some(true) {
            let seed = require_seed(&self.common, "--mc")?;
            let law = network_law(self.distribution.as_deref().unwrap(), self.sparsity)?;
            let m = self.n_out.unwrap();
            let spec = NetworkSpec::gp_limit(x.len(), self.width.unwrap(), m, acts, law);
            let est = empirical_ntk_mc(&spec, x, y, self.trials.unwrap(), seed)?;
            for (a, row) in est.iter().enumerate() {
                for (b, e) in row.iter().enumerate() {
                    let target = if a == b { theta } else { 0.0 };
                    r.check(format!("mc_entry_{a}_{b}"), e.mean, target, 5.0 * e.stderr, "5 stderr");
                }
            }
        }
        Ok(r)
    }
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct TreesVerify {
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
    /// Number of random networks.
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub max_depth: Option<usize>,
    #[arg(long)]
    pub max_width: Option<usize>,
    #[arg(long)]
    pub max_degree: Option<usize>,
}
command!(TreesVerify, "trees-verify");

impl TreesVerify {
    pub fn fill_defaults(&mut self) {
        self.count.get_or_insert(10);
        self.max_depth.get_or_insert(3);
        self.max_width.get_or_insert(4);
        self.max_degree.get_or_insert(3);
    }

    pub fn run(&self) -> Result<Report> {
        let seed = require_seed(&self.common, "trees-verify")?;
        let (d, w, p) = (self.max_depth.unwrap(), self.max_width.unwrap(), self.max_degree.unwrap());
        ensure!(d >= 1 && w >= 1 && p >= 1, "max-depth, max-width and max-degree must be positive");
        let mut r = Report::checks();
        for i in 0..self.count.unwrap() {
            suites::tree_checks(&mut r, i, seed, d, w, p).with_context(|| format!("network {i}"))?;
        }
        Ok(r)
    }
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct Fc {
    #[command(flatten)]
    #[serde(skip)]
    pub common: Common,
    #[arg(long)]
    pub activation: Option<Vec<String>>,
    #[arg(long)]
    pub depth: Option<usize>,
    #[arg(long)]
    pub k_max: Option<usize>,
    #[arg(long)]
    pub x2: Option<f64>,
}
command!(Fc, "fc");

impl Fc {
    pub fn fill_defaults(&mut self) {
        self.activation.get_or_insert_with(|| vec!["relu".into()]);
        self.depth.get_or_insert(3);
        self.k_max.get_or_insert(4);
        self.x2.get_or_insert(1.0);
    }

    pub fn run(&self) -> Result<Report> {
        let (depth, k_max, x2) = (self.depth.unwrap(), self.k_max.unwrap(), self.x2.unwrap());
        let acts = activations(self.activation.as_deref().unwrap(), depth, false)?;
        let exact = fc_moments::<BigRational>(k_max, depth, x2, &acts)?;
        let float = fc_moments::<f64>(k_max, depth, x2, &acts)?;
        let mut r = Report::new(&["k", "L", "m_theory_rational", "m_theory_float"]);
        for k in 1..=k_max {
            for l in 1..=depth {
                r.push(vec![k.into(), l.into(), exact[k - 1][l].to_string().into(), float[k - 1][l].into()]);
            }
        }
        Ok(r)
    }
}
