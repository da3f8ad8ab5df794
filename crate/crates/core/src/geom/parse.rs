use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::GeomError;

/// Coordinates as read from a file, in Selig order
/// (TE, upper surface, LE, lower surface, TE).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawAirfoil {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

impl RawAirfoil {
    /// Minimum number of points accepted into a dataset.
    pub const MIN_POINTS: usize = 20;
}

/// Smallest file the parser accepts; anything shorter cannot describe a
/// closed section.
const MIN_PARSE_POINTS: usize = 3;

fn parse_pair(line: &str) -> Option<(f64, f64)> {
    let mut it = line.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty());
    let a = it.next()?.parse::<f64>().ok()?;
    let b = it.next()?.parse::<f64>().ok()?;
    if it.next().is_some() {
        return None;
    }
    Some((a, b))
}

/// Parse a Selig or Lednicer coordinate file.
///
/// Lednicer files are recognised by a first numeric row whose values are
/// both greater than one (the upper/lower point counts). Their two
/// LE-to-TE blocks are converted to Selig order with the shared LE kept
/// once.
pub fn parse_coordinate_file(bytes: &[u8]) -> Result<RawAirfoil, GeomError> {
    let text = std::str::from_utf8(bytes)
        .map_err(|_| GeomError::MalformedFile("file is not valid UTF-8".into()))?;
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty()).peekable();

    let first = *lines
        .peek()
        .ok_or_else(|| GeomError::MalformedFile("empty file".into()))?;
    let name = if parse_pair(first).is_none() {
        lines.next();
        first.to_string()
    } else {
        String::new()
    };

    let mut rows = Vec::new();
    for (k, line) in lines.enumerate() {
        match parse_pair(line) {
            Some((x, y)) if x.is_finite() && y.is_finite() => rows.push((x, y)),
            _ => {
                return Err(GeomError::MalformedFile(format!(
                    "non-numeric row {} `{}`",
                    k + 1,
                    line
                )))
            }
        }
    }
    let Some(&(a, b)) = rows.first() else {
        return Err(GeomError::MalformedFile("no coordinate rows".into()));
    };

    let points = if a > 1.0 && b > 1.0 {
        lednicer_to_selig(&rows[1..], a, b)?
    } else if a > 1.0 || b > 1.0 {
        return Err(GeomError::AmbiguousFormat(format!(
            "first row ({a}, {b}) is neither a point nor a count pair"
        )));
    } else {
        rows
    };

    if points.len() < MIN_PARSE_POINTS {
        return Err(GeomError::MalformedFile(format!(
            "{} points, need at least {}",
            points.len(),
            MIN_PARSE_POINTS
        )));
    }
    Ok(RawAirfoil { name, points })
}

fn lednicer_to_selig(rows: &[(f64, f64)], nu: f64, nl: f64) -> Result<Vec<(f64, f64)>, GeomError> {
    if nu.fract() != 0.0 || nl.fract() != 0.0 {
        return Err(GeomError::AmbiguousFormat(format!("non-integer point counts {nu} {nl}")));
    }
    let (nu, nl) = (nu as usize, nl as usize);
    if rows.len() != nu + nl {
        return Err(GeomError::MalformedFile(format!(
            "header announces {} + {} points, found {}",
            nu,
            nl,
            rows.len()
        )));
    }
    let (upper, lower) = rows.split_at(nu);
    let mut pts: Vec<(f64, f64)> = upper.iter().rev().copied().collect();
    let skip = usize::from(matches!((upper.first(), lower.first()), (Some(u), Some(l)) if u == l));
    pts.extend_from_slice(&lower[skip..]);
    Ok(pts)
}

/// Serialise points in Selig format with a name line.
pub fn write_selig(name: &str, points: &[(f64, f64)]) -> String {
    let mut out = String::with_capacity(points.len() * 24 + name.len() + 1);
    out.push_str(name);
    out.push('\n');
    for (x, y) in points {
        let _ = writeln!(out, "{x:.10} {y:.10}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selig_toy_passes_through() {
        let raw = parse_coordinate_file(b"1 0\n0.5 0.1\n0 0\n0.5 -0.1\n").unwrap();
        assert_eq!(raw.points, vec![(1.0, 0.0), (0.5, 0.1), (0.0, 0.0), (0.5, -0.1)]);
        assert!(raw.name.is_empty());
    }

    #[test]
    fn lednicer_toy_is_converted() {
        let text = "TOY LEDNICER\n3. 3.\n\n0 0\n0.5 0.1\n1 0\n\n0 0\n0.5 -0.1\n1 0\n";
        let raw = parse_coordinate_file(text.as_bytes()).unwrap();
        assert_eq!(raw.name, "TOY LEDNICER");
        // hand conversion: upper reversed, shared LE once, then lower
        assert_eq!(
            raw.points,
            vec![(1.0, 0.0), (0.5, 0.1), (0.0, 0.0), (0.5, -0.1), (1.0, 0.0)]
        );
    }

    #[test]
    fn two_points_are_rejected() {
        assert!(matches!(
            parse_coordinate_file(b"name\n1 0\n0 0\n"),
            Err(GeomError::MalformedFile(_))
        ));
    }

    #[test]
    fn garbage_mid_stream_is_rejected() {
        let err = parse_coordinate_file(b"foil\n1 0\n0.5 0.1\nhello world\n0 0\n").unwrap_err();
        assert!(matches!(err, GeomError::MalformedFile(_)));
    }

    #[test]
    fn half_count_header_is_ambiguous() {
        let err = parse_coordinate_file(b"foil\n35 0.5\n0 0\n1 0\n0.5 0.1\n").unwrap_err();
        assert!(matches!(err, GeomError::AmbiguousFormat(_)));
    }

    #[test]
    fn selig_writer_round_trips() {
        let pts = vec![(1.0, 0.0), (0.5, 0.0625), (0.0, 0.0), (0.5, -0.0625), (1.0, 0.0)];
        let raw = parse_coordinate_file(write_selig("rt", &pts).as_bytes()).unwrap();
        assert_eq!(raw.name, "rt");
        assert_eq!(raw.points, pts);
    }
}
