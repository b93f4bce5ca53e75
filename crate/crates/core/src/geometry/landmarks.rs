use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use nalgebra::Point3;

use crate::error::{Error, Result};

/// The seven alignment landmarks, in their canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Landmark {
    RightEyeOuter,
    RightEyeInner,
    LeftEyeInner,
    LeftEyeOuter,
    NoseBottom,
    RightMouth,
    LeftMouth,
}

impl Landmark {
    pub const ALL: [Landmark; 7] = [
        Landmark::RightEyeOuter,
        Landmark::RightEyeInner,
        Landmark::LeftEyeInner,
        Landmark::LeftEyeOuter,
        Landmark::NoseBottom,
        Landmark::RightMouth,
        Landmark::LeftMouth,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Landmark::RightEyeOuter => "right_eye_outer",
            Landmark::RightEyeInner => "right_eye_inner",
            Landmark::LeftEyeInner => "left_eye_inner",
            Landmark::LeftEyeOuter => "left_eye_outer",
            Landmark::NoseBottom => "nose_bottom",
            Landmark::RightMouth => "right_mouth",
            Landmark::LeftMouth => "left_mouth",
        }
    }

    pub fn from_name(name: &str) -> Option<Landmark> {
        Landmark::ALL.into_iter().find(|l| l.name() == name)
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Landmark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Seven named points, either on a mesh (3D) or on an image (2D, stored
/// with `z = 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandmarkSet7 {
    points: [Point3<f64>; 7],
    dim: usize,
}

impl LandmarkSet7 {
    pub fn new_3d(points: [Point3<f64>; 7]) -> Result<Self> {
        Self::validated(points, 3)
    }

    pub fn new_2d(points: [[f64; 2]; 7]) -> Result<Self> {
        Self::validated(points.map(|[x, y]| Point3::new(x, y, 0.0)), 2)
    }

    fn validated(points: [Point3<f64>; 7], dim: usize) -> Result<Self> {
        for (l, p) in Landmark::ALL.iter().zip(&points) {
            if !p.coords.iter().all(|c| c.is_finite()) {
                return Err(Error::InvalidLandmarks(format!("{l} is not finite")));
            }
        }
        let eyes = &points[..4];
        for i in 0..4 {
            for j in i + 1..4 {
                if eyes[i] == eyes[j] {
                    return Err(Error::InvalidLandmarks(format!(
                        "eye landmarks {} and {} coincide",
                        Landmark::ALL[i],
                        Landmark::ALL[j]
                    )));
                }
            }
        }
        Ok(Self { points, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, l: Landmark) -> Point3<f64> {
        self.points[l.index()]
    }

    pub fn points(&self) -> &[Point3<f64>; 7] {
        &self.points
    }

    /// Applies `f` to every point; the result is re-validated.
    pub fn map(&self, f: impl FnMut(Point3<f64>) -> Point3<f64>) -> Result<Self> {
        Self::validated(self.points.map(f), self.dim)
    }

    /// Parses the named-row text format (`name x y [z]`) or, when the
    /// content starts with `{`, the JSON object variant.
    pub fn parse(text: &str, source: &str) -> Result<Self> {
        if text.trim_start().starts_with('{') {
            parse_json(text, source)
        } else {
            parse_rows(text, source)
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Named-row text, one landmark per line in canonical order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (l, p) in Landmark::ALL.iter().zip(&self.points) {
            if self.dim == 3 {
                out.push_str(&format!("{} {} {} {}\n", l.name(), p.x, p.y, p.z));
            } else {
                out.push_str(&format!("{} {} {}\n", l.name(), p.x, p.y));
            }
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }
}

fn assemble(found: BTreeMap<Landmark, Vec<f64>>, source: &str) -> Result<LandmarkSet7> {
    if found.len() != 7 {
        let missing: Vec<_> = Landmark::ALL
            .iter()
            .filter(|l| !found.contains_key(l))
            .map(|l| l.name())
            .collect();
        return Err(Error::InvalidLandmarks(format!(
            "{source}: expected 7 landmarks, missing {}",
            missing.join(", ")
        )));
    }
    let dims: Vec<usize> = found.values().map(Vec::len).collect();
    let dim = dims[0];
    if dims.iter().any(|&d| d != dim) {
        return Err(Error::InvalidLandmarks(format!(
            "{source}: landmarks mix 2D and 3D coordinates"
        )));
    }
    let mut points = [Point3::origin(); 7];
    for (l, c) in &found {
        points[l.index()] = Point3::new(c[0], c[1], if dim == 3 { c[2] } else { 0.0 });
    }
    LandmarkSet7::validated(points, dim)
        .map_err(|e| Error::InvalidLandmarks(format!("{source}: {e}")))
}

fn parse_rows(text: &str, source: &str) -> Result<LandmarkSet7> {
    let mut found = BTreeMap::new();
    let mut rows = 0;
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        rows += 1;
        let location = format!("{source}:{}", n + 1);
        let mut fields = line.split_whitespace();
        let name = fields.next().unwrap_or_default();
        let landmark = Landmark::from_name(name)
            .ok_or_else(|| Error::parse(&location, format!("unknown landmark name `{name}`")))?;
        let coords = fields
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| Error::parse(&location, format!("`{f}` is not a number")))
            })
            .collect::<Result<Vec<_>>>()?;
        if coords.len() != 2 && coords.len() != 3 {
            return Err(Error::parse(
                &location,
                format!("expected 2 or 3 coordinates, found {}", coords.len()),
            ));
        }
        if found.insert(landmark, coords).is_some() {
            return Err(Error::parse(&location, format!("duplicate landmark `{name}`")));
        }
    }
    if rows != 7 {
        return Err(Error::InvalidLandmarks(format!(
            "{source}: expected 7 landmark rows, found {rows}"
        )));
    }
    assemble(found, source)
}

fn parse_json(text: &str, source: &str) -> Result<LandmarkSet7> {
    let map: BTreeMap<String, Vec<f64>> = serde_json::from_str(text)
        .map_err(|e| Error::parse(source, format!("invalid landmark JSON: {e}")))?;
    let mut found = BTreeMap::new();
    for (name, coords) in map {
        let landmark = Landmark::from_name(&name)
            .ok_or_else(|| Error::parse(source, format!("unknown landmark name `{name}`")))?;
        if coords.len() != 2 && coords.len() != 3 {
            return Err(Error::parse(
                source,
                format!("`{name}` has {} coordinates", coords.len()),
            ));
        }
        found.insert(landmark, coords);
    }
    assemble(found, source)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SORTED: &str = "\
right_eye_outer -45 30 10
right_eye_inner -15 30 14
left_eye_inner 15 30 14
left_eye_outer 45 30 10
nose_bottom 0 -10 25
right_mouth -25 -45 12
left_mouth 25 -45 12
";

    #[test]
    fn parses_seven_rows() {
        let set = LandmarkSet7::parse(SORTED, "t").unwrap();
        assert_eq!(set.dim(), 3);
        assert_eq!(set.get(Landmark::NoseBottom), Point3::new(0.0, -10.0, 25.0));
    }

    #[test]
    fn file_order_is_irrelevant() {
        let mut lines: Vec<&str> = SORTED.lines().collect();
        lines.rotate_left(4);
        let shuffled = lines.join("\n");
        assert!(shuffled.starts_with("nose_bottom"));
        assert_eq!(
            LandmarkSet7::parse(&shuffled, "t").unwrap(),
            LandmarkSet7::parse(SORTED, "t").unwrap()
        );
    }

    #[test]
    fn wrong_count_is_rejected() {
        let six: String = SORTED.lines().take(6).map(|l| format!("{l}\n")).collect();
        let err = LandmarkSet7::parse(&six, "t").unwrap_err();
        assert!(err.to_string().contains("found 6"), "{err}");
    }

    #[test]
    fn duplicate_and_unknown_names() {
        let dup = SORTED.replace("left_mouth", "right_mouth");
        assert!(LandmarkSet7::parse(&dup, "t").unwrap_err().to_string().contains("duplicate"));
        let unknown = SORTED.replace("left_mouth", "chin");
        assert!(LandmarkSet7::parse(&unknown, "t").unwrap_err().to_string().contains("unknown"));
        let nan = SORTED.replace("-45 12", "abc 12");
        assert!(LandmarkSet7::parse(&nan, "t").unwrap_err().to_string().contains("not a number"));
    }

    #[test]
    fn json_variant_matches_rows() {
        let json = r#"{"nose_bottom":[0,-10,25],"right_eye_outer":[-45,30,10],
            "right_eye_inner":[-15,30,14],"left_eye_inner":[15,30,14],"left_eye_outer":[45,30,10],
            "right_mouth":[-25,-45,12],"left_mouth":[25,-45,12]}"#;
        assert_eq!(
            LandmarkSet7::parse(json, "t").unwrap(),
            LandmarkSet7::parse(SORTED, "t").unwrap()
        );
    }

    #[test]
    fn two_dimensional_rows() {
        let text: String = SORTED
            .lines()
            .map(|l| {
                let f: Vec<_> = l.split_whitespace().collect();
                format!("{} {} {}\n", f[0], f[1], f[2])
            })
            .collect();
        let set = LandmarkSet7::parse(&text, "t").unwrap();
        assert_eq!(set.dim(), 2);
        assert_eq!(LandmarkSet7::parse(&set.to_text(), "t").unwrap(), set);
    }

    #[test]
    fn coincident_eyes_are_rejected() {
        let bad = SORTED.replace("right_eye_inner -15 30 14", "right_eye_inner -45 30 10");
        assert!(LandmarkSet7::parse(&bad, "t").is_err());
    }
}
