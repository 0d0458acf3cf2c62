//! Value parsers for the command line.

use std::fs;
use std::path::Path;

use densejump::flux::FluxConfig;
use densejump::waves::{State, SystemFixture};
use serde::de::DeserializeOwned;

use crate::Failure;

fn float(s: &str, what: &str) -> Result<f64, Failure> {
    s.trim().parse::<f64>().map_err(|_| Failure::Usage(format!("{what}: {s:?} is not a number")))
}

/// `a,b,...`
pub fn list(s: &str, what: &str) -> Result<Vec<f64>, Failure> {
    s.split(',').map(|p| float(p, what)).collect()
}

/// `a,b`
pub fn pair(s: &str, what: &str) -> Result<(f64, f64), Failure> {
    match list(s, what)?.as_slice() {
        [a, b] => Ok((*a, *b)),
        _ => Err(Failure::Usage(format!("{what}: expected two comma-separated numbers, got {s:?}"))),
    }
}

/// `lo:hi:step`, endpoints included.
pub fn range(s: &str, what: &str) -> Result<Vec<f64>, Failure> {
    let parts: Vec<f64> = s.split(':').map(|p| float(p, what)).collect::<Result<_, _>>()?;
    let [lo, hi, step] = parts[..] else {
        return Err(Failure::Usage(format!("{what}: expected lo:hi:step, got {s:?}")));
    };
    if !(step > 0.0) || hi < lo {
        return Err(Failure::Usage(format!("{what}: need step > 0 and hi >= lo")));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    if n > 10_000_000 {
        return Err(Failure::Usage(format!("{what}: {n} points is too many")));
    }
    Ok((0..=n).map(|k| lo + step * k as f64).collect())
}

/// JSON with the failing field path in the error.
pub fn from_json<T: DeserializeOwned>(text: &str, what: &str) -> Result<T, Failure> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Failure::Usage(format!("{what}: at {path}: {}", e.into_inner()))
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    from_json(&text, &path.display().to_string())
}

/// A bare kind name, inline JSON, or a path to a JSON file.
pub fn flux(spec: &str, domain: Option<&str>) -> Result<FluxConfig, Failure> {
    let mut cfg: FluxConfig = if spec.trim_start().starts_with('{') {
        from_json(spec, "flux")?
    } else if Path::new(spec).is_file() {
        read_json(Path::new(spec))?
    } else {
        FluxConfig { kind: spec.to_string(), params: Default::default(), domain: None }
    };
    if let Some(d) = domain {
        let (lo, hi) = pair(d, "domain")?;
        cfg.domain = Some([lo, hi]);
    }
    // surfaces unknown kinds and missing parameters before any work
    cfg.flux()?;
    Ok(cfg)
}

pub fn fixture(kind: &str, gamma: f64, diagonal: Option<&str>) -> Result<SystemFixture, Failure> {
    let f = match kind {
        "isentropic" => SystemFixture::Isentropic { gamma },
        "euler3" => SystemFixture::Euler3 { gamma },
        "burgers" => SystemFixture::Burgers,
        "linear" => SystemFixture::Linear {
            diagonal: list(diagonal.ok_or_else(|| Failure::Usage("linear fixture needs --diagonal".into()))?, "diagonal")?,
        },
        other => return Err(Failure::Usage(format!("fixture: unknown kind {other:?}"))),
    };
    f.build()?;
    Ok(f)
}

pub fn state(fixture: &SystemFixture, spec: Option<&str>) -> Result<State, Failure> {
    match spec {
        None => Ok(fixture.default_state()),
        Some(s) => Ok(State::from_vec(list(s, "state")?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_include_endpoints() {
        let r = range("-0.1:0.1:0.005", "sigma").unwrap();
        assert_eq!(r.len(), 41);
        assert_eq!(r[0], -0.1);
        assert!((r[40] - 0.1).abs() < 1e-15);
        assert!(range("1:0:0.1", "x").is_err());
        assert!(range("0:1", "x").is_err());
    }

    #[test]
    fn flux_specs() {
        assert_eq!(flux("burgers", None).unwrap().kind, "burgers");
        let p = flux(r#"{"kind":"power","params":{"p":3}}"#, Some("0,2")).unwrap();
        assert_eq!(p.domain, Some([0.0, 2.0]));
        assert!(flux("nonsense", None).is_err());
        match flux(r#"{"params":{}}"#, None) {
            Err(Failure::Usage(m)) => assert!(m.contains("kind"), "{m}"),
            _ => panic!("missing kind accepted"),
        }
    }

    #[test]
    fn fixtures_and_states() {
        let f = fixture("isentropic", 1.4, None).unwrap();
        assert_eq!(state(&f, None).unwrap().len(), 2);
        assert_eq!(state(&f, Some("1.2,0.1")).unwrap()[0], 1.2);
        assert!(fixture("linear", 1.4, None).is_err());
        assert!(fixture("isentropic", 0.5, None).is_err());
    }
}
