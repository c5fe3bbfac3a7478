use std::str::FromStr;

use beg_core::diagram::linear_grid;

/// A grid given either as `start:stop:step` or as a comma-separated list.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub text: String,
    pub values: Vec<f64>,
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parse = |p: &str| {
            p.trim()
                .parse::<f64>()
                .map_err(|e| format!("bad number {p:?}: {e}"))
        };
        let values = if s.contains(':') {
            let parts: Vec<&str> = s.split(':').collect();
            let [start, stop, step] = parts[..] else {
                return Err(format!("expected start:stop:step, got {s:?}"));
            };
            linear_grid(parse(start)?, parse(stop)?, parse(step)?).map_err(|e| e.to_string())?
        } else {
            s.split(',').map(parse).collect::<Result<Vec<_>, _>>()?
        };
        if values.is_empty() {
            return Err("grid is empty".into());
        }
        if let Some(x) = values.iter().find(|x| !x.is_finite()) {
            return Err(format!("grid value {x} is not finite"));
        }
        Ok(Self {
            text: s.to_string(),
            values,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_ranges_and_lists() {
        let g: GridSpec = "0.5:1:0.25".parse().unwrap();
        assert_eq!(g.values, vec![0.5, 0.75, 1.0]);
        let g: GridSpec = "1, 2,3".parse().unwrap();
        assert_eq!(g.values, vec![1.0, 2.0, 3.0]);
        assert!("1:2".parse::<GridSpec>().is_err());
        assert!("2:1:0.1".parse::<GridSpec>().is_err());
        assert!("a,b".parse::<GridSpec>().is_err());
        assert!("inf".parse::<GridSpec>().is_err());
    }
}
