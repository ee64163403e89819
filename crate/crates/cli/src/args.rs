//! Flag value parsers.

use std::str::FromStr;

use num_complex::Complex64;

/// `lo:hi:count`, endpoints inclusive, or a single number.
pub fn parse_grid(text: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = text.split(':').collect();
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| format!("'{s}' is not a finite number"))
    };
    match parts.as_slice() {
        [single] => Ok(vec![num(single)?]),
        [lo, hi, count] => {
            let (lo, hi) = (num(lo)?, num(hi)?);
            let count: usize = count
                .trim()
                .parse()
                .map_err(|_| format!("'{count}' is not a point count"))?;
            match count {
                0 => Err("grid has zero points".to_string()),
                1 if lo != hi => Err("a one-point grid needs lo == hi".to_string()),
                1 => Ok(vec![lo]),
                _ if !(hi > lo) => Err(format!("grid needs lo < hi, got {lo}:{hi}")),
                _ => {
                    let last = count - 1;
                    Ok((0..count)
                        .map(|i| if i == last { hi } else { lo + (hi - lo) * i as f64 / last as f64 })
                        .collect())
                }
            }
        }
        _ => Err(format!("'{text}' is not of the form lo:hi:count")),
    }
}

/// Comma-separated numbers.
pub fn parse_list(text: &str) -> Result<Vec<f64>, String> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("'{s}' is not a finite number"))
        })
        .collect()
}

/// Four comma-separated complex amplitudes, e.g. `0.1+0.2i,-0.3,0,1i`.
pub fn parse_settings(text: &str) -> Result<[Complex64; 4], String> {
    let values = text
        .split(',')
        .map(|s| Complex64::from_str(s.trim()).map_err(|_| format!("'{s}' is not a complex number")))
        .collect::<Result<Vec<_>, _>>()?;
    values
        .try_into()
        .map_err(|v: Vec<Complex64>| format!("expected 4 settings (a1,a2,b1,b2), got {}", v.len()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0").unwrap(), vec![0.0]);
        assert_eq!(parse_grid("-1:0:3").unwrap(), vec![-1.0, -0.5, 0.0]);
        let g = parse_grid("0.3:1.0:36").unwrap();
        assert_eq!(g.len(), 36);
        assert_eq!(g[0], 0.3);
        assert_eq!(g[35], 1.0);
        assert!(parse_grid("0:1:0").is_err());
        assert!(parse_grid("1:0:5").is_err());
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("a:1:2").is_err());
        assert!(parse_grid("0:1:1").is_err());
    }

    #[test]
    fn settings() {
        let s = parse_settings("0,0.5+0.25i,-1i, 2").unwrap();
        assert_eq!(s[1], Complex64::new(0.5, 0.25));
        assert_eq!(s[2], Complex64::new(0.0, -1.0));
        assert!(parse_settings("0,0,0").is_err());
        assert!(parse_settings("0,0,0,x").is_err());
    }

    #[test]
    fn lists() {
        assert_eq!(parse_list("0, 0.5,2").unwrap(), vec![0.0, 0.5, 2.0]);
        assert!(parse_list("0,,1").is_err());
    }
}
