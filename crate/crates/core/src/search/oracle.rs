//! Naive full enumeration used to cross-check the selectors in tests.
//!
//! Shares no table, metric or enumeration code with the main search path:
//! counts come straight from the raw column codes, subsets and windows are
//! bitmasks, and every score is evaluated from probabilities.

use std::collections::BTreeMap;

use super::{Candidate, FeatureSubset, Locus, Mode, SearchConfig};
use crate::distribution::Dataset;
use crate::error::{Error, Result};

const MAX_FEATURES: usize = 4;
const MAX_LEVELS: usize = 3;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Resolution {
    Global,
    Window,
    Profile(String),
}

pub fn brute_force_oracle(
    data: &Dataset,
    features: &[usize],
    config: &SearchConfig,
    resolution: &Resolution,
) -> Result<Vec<Candidate>> {
    config.validate()?;
    if config.mode != Mode::Categorical {
        return Err(Error::OracleTooLarge("only categorical mode is supported".into()));
    }
    if features.len() > MAX_FEATURES {
        return Err(Error::OracleTooLarge(format!("{} features", features.len())));
    }
    let mut features = features.to_vec();
    features.sort_unstable();
    features.dedup();
    let mut columns = Vec::new();
    for &f in &features {
        let col = data
            .column(f)
            .as_categorical()
            .ok_or_else(|| Error::SchemaMismatch(format!("column {f} is not categorical")))?;
        if col.levels().len() > MAX_LEVELS {
            return Err(Error::OracleTooLarge(format!(
                "column {f} has {} levels",
                col.levels().len()
            )));
        }
        columns.push(col);
    }
    let target = data.target_column();
    let y_code = match resolution {
        Resolution::Profile(y) => Some(target.code_of(y).ok_or_else(|| {
            Error::InvalidConfig(format!("target value '{y}' is not observed"))
        })?),
        _ => None,
    };

    let mut out = Vec::new();
    for mask in 1u32..(1 << features.len()) {
        let picked: Vec<usize> = (0..features.len()).filter(|i| mask & (1 << i) != 0).collect();
        if picked.len() > config.max_k {
            continue;
        }
        let subset = FeatureSubset(picked.iter().map(|&i| features[i]).collect());
        let names: Vec<String> = subset.0.iter().map(|&c| data.name(c).to_string()).collect();

        // cells[x][y] over complete cases
        let mut cells: BTreeMap<Vec<u32>, BTreeMap<u32, u64>> = BTreeMap::new();
        let mut ys: BTreeMap<u32, u64> = BTreeMap::new();
        let mut n = 0u64;
        'rows: for r in 0..data.n_rows() {
            let mut x = Vec::new();
            for &i in &picked {
                match columns[i].codes()[r] {
                    Some(c) => x.push(c),
                    None => continue 'rows,
                }
            }
            let y = target.codes()[r].expect("target has no missing values");
            *cells.entry(x).or_default().entry(y).or_default() += 1;
            *ys.entry(y).or_default() += 1;
            n += 1;
        }
        if n == 0 {
            continue;
        }
        let nf = n as f64;
        let h = |y: u32| ys[&y] as f64 / nf;
        let levels: Vec<&Vec<u32>> = cells.keys().collect();
        let g = |x: &Vec<u32>| cells[x].values().sum::<u64>() as f64 / nf;
        let label = |x: &Vec<u32>| {
            let parts: Vec<&str> = x
                .iter()
                .zip(&picked)
                .map(|(&c, &i)| columns[i].levels()[c as usize].as_str())
                .collect();
            if parts.len() == 1 {
                parts[0].to_string()
            } else {
                format!("({})", parts.join(","))
            }
        };
        let support = |x: &Vec<u32>| cells[x].values().sum::<u64>();
        let make = |locus: Locus, score: f64, support_count: u64| Candidate {
            subset: subset.clone(),
            features: names.clone(),
            locus,
            score,
            support_count,
            table_total: n,
            model: None,
        };

        // Σ_{x∈W} g(x) Σ_y f(y|x) ln(f(y|x)/h(y)) over Σ_{x∈W} g(x) Σ_y −f(y|x) ln h(y)
        let eta_over = |members: &[&Vec<u32>]| {
            let (mut num, mut den) = (0.0, 0.0);
            for &x in members {
                let gx = g(x);
                for (&y, &c) in &cells[x] {
                    let fyx = c as f64 / nf / gx;
                    num += gx * fyx * (fyx / h(y)).ln();
                    den -= gx * fyx * h(y).ln();
                }
            }
            if den == 0.0 {
                1.0
            } else {
                (num / den).clamp(0.0, 1.0)
            }
        };

        match resolution {
            Resolution::Global => {
                let mi: f64 = cells
                    .iter()
                    .flat_map(|(x, row)| row.iter().map(move |(&y, &c)| (x, y, c)))
                    .map(|(x, y, c)| {
                        let p = c as f64 / nf;
                        p * (p / (g(x) * h(y))).ln()
                    })
                    .sum();
                let hy: f64 = ys.keys().map(|&y| -h(y) * h(y).ln()).sum();
                let eta = if hy == 0.0 { 1.0 } else { (mi / hy).clamp(0.0, 1.0) };
                out.push(make(Locus::WholeRange, eta, n));
            }
            Resolution::Window => {
                let cap = config.max_window_cells.unwrap_or(usize::MAX);
                for wmask in 1u64..(1 << levels.len()) {
                    let members: Vec<&Vec<u32>> = (0..levels.len())
                        .filter(|i| wmask & (1 << i) != 0)
                        .map(|i| levels[i])
                        .collect();
                    let count: u64 = members.iter().map(|x| support(x)).sum();
                    if members.len() > cap || count as f64 <= config.min_support * nf {
                        continue;
                    }
                    let locus = Locus::Window {
                        levels: members.iter().map(|x| (*x).clone()).collect(),
                        labels: members.iter().map(|x| label(x)).collect(),
                    };
                    out.push(make(locus, eta_over(&members), count));
                }
            }
            Resolution::Profile(_) => {
                let y = y_code.expect("set for profiles");
                if !ys.contains_key(&y) {
                    continue;
                }
                for &x in &levels {
                    let count = support(x);
                    if count as f64 <= config.min_support * nf {
                        continue;
                    }
                    let fyx = cells[x].get(&y).copied().unwrap_or(0) as f64 / count as f64;
                    let locus = Locus::Profile {
                        level: x.clone(),
                        label: label(x),
                    };
                    out.push(make(locus, fyx / h(y), count));
                }
            }
        }
    }

    if matches!(resolution, Resolution::Profile(_)) && out.is_empty() {
        return Err(Error::NoFeasibleProfile);
    }

    let key = |s: f64| (s / 1e-12).round();
    let locus_codes = |l: &Locus| -> Vec<Vec<u32>> {
        match l {
            Locus::WholeRange => Vec::new(),
            Locus::Window { levels, .. } => levels.clone(),
            Locus::Profile { level, .. } => vec![level.clone()],
        }
    };
    out.sort_by(|a, b| {
        key(b.score)
            .partial_cmp(&key(a.score))
            .unwrap()
            .then(a.subset.0.len().cmp(&b.subset.0.len()))
            .then(locus_codes(&a.locus).len().cmp(&locus_codes(&b.locus).len()))
            .then(a.subset.0.cmp(&b.subset.0))
            .then(locus_codes(&a.locus).cmp(&locus_codes(&b.locus)))
    });
    if let Some(best) = out.first().map(|c| key(c.score)) {
        let ties = out.iter().filter(|c| key(c.score) == best).count();
        out.truncate(config.top_n.max(ties));
    }
    Ok(out)
}
