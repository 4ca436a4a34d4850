//! Sweep grammar: `key=v1,v2,...` terms and at most one `seeds=a..b`
//! (inclusive). Enhancement sets use `+` inside one value, e.g.
//! `enhancements=none,edt+pp`.

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepPlan {
    pub params: Vec<(String, Vec<String>)>,
    pub seeds: Option<Vec<u64>>,
}

fn parse_seeds(v: &str) -> Result<Vec<u64>, String> {
    let (a, b) = v.split_once("..").ok_or_else(|| format!("seeds must look like a..b, got `{v}`"))?;
    let a: u64 = a.trim().parse().map_err(|_| format!("bad seed `{a}`"))?;
    let b: u64 = b.trim().parse().map_err(|_| format!("bad seed `{b}`"))?;
    if a > b {
        return Err(format!("empty seed range {a}..{b}"));
    }
    Ok((a..=b).collect())
}

impl SweepPlan {
    pub fn parse(terms: &[String]) -> Result<Self, String> {
        let mut plan = SweepPlan { params: Vec::new(), seeds: None };
        for term in terms {
            let (key, values) = term.split_once('=').ok_or_else(|| format!("`{term}` is not key=values"))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(format!("`{term}` has no key"));
            }
            if key == "seeds" {
                if plan.seeds.is_some() {
                    return Err("seeds given twice".into());
                }
                plan.seeds = Some(parse_seeds(values)?);
                continue;
            }
            if key == "seed" {
                return Err("use seeds=a..b to sweep seeds".into());
            }
            if plan.params.iter().any(|(k, _)| k == key) {
                return Err(format!("`{key}` given twice"));
            }
            let values: Vec<String> = values.split(',').map(|v| v.trim().to_string()).collect();
            if values.iter().any(String::is_empty) {
                return Err(format!("`{term}` has an empty value"));
            }
            plan.params.push((key.to_string(), values));
        }
        Ok(plan)
    }

    /// Every combination of parameter values, first parameter slowest.
    pub fn cells(&self) -> Vec<Vec<String>> {
        self.params.iter().fold(vec![Vec::new()], |acc, (_, values)| {
            acc.iter()
                .flat_map(|prefix| {
                    values.iter().map(move |v| {
                        let mut c = prefix.clone();
                        c.push(v.clone());
                        c
                    })
                })
                .collect()
        })
    }
}
