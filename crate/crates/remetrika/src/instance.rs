//! The input model: exact finite instances (point set plus index-table maps)
//! and approximate planar affine instances for rendering demos.
//!
//! Point indices are 0-based in files and reports; map names (letters) are
//! 1-based. The JSON schema:
//!
//! ```text
//! finite:   {"type":"finite","name":"...","points":N,"maps":[[...],[...]]}
//! affine2d: {"type":"affine2d","maps":[{"a":..,"b":..,"c":..,"d":..,"e":..,"f":..},...],
//!            "bbox":[x0,y0,x1,y1]}
//! ```
//!
//! Rationals serialize as `"p/q"` strings or integers.

use serde_json::{json, Map, Value};

use crate::ratio::{rat_from_json, rat_to_string, Rat};
use crate::words::Letter;
use crate::{Error, Result};

/// A finite point set `{0, ..., points-1}` with `k` self-maps given as index
/// tables: `maps[i][x]` is the image of point `x` under map `i+1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteInstance {
    pub name: Option<String>,
    pub points: usize,
    pub maps: Vec<Vec<usize>>,
}

impl FiniteInstance {
    pub fn new(points: usize, maps: Vec<Vec<usize>>) -> Result<FiniteInstance> {
        let inst = FiniteInstance {
            name: None,
            points,
            maps,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn named(name: &str, points: usize, maps: Vec<Vec<usize>>) -> Result<FiniteInstance> {
        let mut inst = FiniteInstance::new(points, maps)?;
        inst.name = Some(name.to_string());
        Ok(inst)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points == 0 {
            return Err(Error::Validation("points must be >= 1".into()));
        }
        if self.maps.is_empty() {
            return Err(Error::Validation("at least one map is required".into()));
        }
        for (m, table) in self.maps.iter().enumerate() {
            if table.len() != self.points {
                return Err(Error::Validation(format!(
                    "map {m} has {} entries, expected {}",
                    table.len(),
                    self.points
                )));
            }
            for (x, &y) in table.iter().enumerate() {
                if y >= self.points {
                    return Err(Error::Validation(format!(
                        "map {m} entry {x}: value {y} >= points {}",
                        self.points
                    )));
                }
            }
        }
        Ok(())
    }

    /// Number of maps (the alphabet size `k`).
    pub fn map_count(&self) -> usize {
        self.maps.len()
    }

    /// Applies map `letter` (1-based) to a point.
    pub fn apply(&self, letter: Letter, x: usize) -> usize {
        self.maps[letter.map_index()][x]
    }

    /// The Hutchinson operator: the union of all map images of `set`.
    pub fn hutchinson(&self, set: &[usize]) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .maps
            .iter()
            .flat_map(|table| set.iter().map(move |&x| table[x]))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// The instance induced on a forward-invariant subset, with points
    /// renumbered by their rank in the sorted subset. Errors when the subset
    /// is empty or not invariant under every map.
    pub fn restrict(&self, subset: &[usize]) -> Result<(FiniteInstance, Vec<usize>)> {
        let mut sorted: Vec<usize> = subset.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.is_empty() {
            return Err(Error::Precondition("restriction to an empty subset".into()));
        }
        if let Some(&bad) = sorted.iter().find(|&&x| x >= self.points) {
            return Err(Error::Precondition(format!(
                "subset point {bad} out of range"
            )));
        }
        let rank = |x: usize| sorted.binary_search(&x);
        let maps = self
            .maps
            .iter()
            .enumerate()
            .map(|(m, table)| {
                sorted
                    .iter()
                    .map(|&x| {
                        rank(table[x]).map_err(|_| {
                            Error::Precondition(format!(
                                "subset not invariant: map {m} sends {x} to {} outside it",
                                table[x]
                            ))
                        })
                    })
                    .collect::<Result<Vec<usize>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((
            FiniteInstance {
                name: None,
                points: sorted.len(),
                maps,
            },
            sorted,
        ))
    }

    pub fn to_json(&self) -> Value {
        let mut obj = Map::new();
        obj.insert("type".into(), json!("finite"));
        if let Some(name) = &self.name {
            obj.insert("name".into(), json!(name));
        }
        obj.insert("points".into(), json!(self.points));
        obj.insert("maps".into(), json!(self.maps));
        Value::Object(obj)
    }
}

/// A planar affine map `(x, y) -> (a x + b y + e, c x + d y + f)` with exact
/// rational coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    pub a: Rat,
    pub b: Rat,
    pub c: Rat,
    pub d: Rat,
    pub e: Rat,
    pub f: Rat,
}

impl AffineMap {
    pub fn apply(&self, x: &Rat, y: &Rat) -> (Rat, Rat) {
        (
            &self.a * x + &self.b * y + &self.e,
            &self.c * x + &self.d * y + &self.f,
        )
    }

    pub fn apply_f64(&self, x: f64, y: f64) -> (f64, f64) {
        use crate::ratio::rat_to_f64 as g;
        (
            g(&self.a) * x + g(&self.b) * y + g(&self.e),
            g(&self.c) * x + g(&self.d) * y + g(&self.f),
        )
    }
}

/// A demo instance: affine maps sending a bounding box into itself.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineInstance {
    pub maps: Vec<AffineMap>,
    /// `[x0, y0, x1, y1]` with `x0 < x1`, `y0 < y1`.
    pub bbox: [Rat; 4],
}

impl AffineInstance {
    pub fn validate(&self) -> Result<()> {
        if self.maps.is_empty() {
            return Err(Error::Validation(
                "at least one affine map is required".into(),
            ));
        }
        let [x0, y0, x1, y1] = &self.bbox;
        if x0 >= x1 || y0 >= y1 {
            return Err(Error::Validation(
                "bbox must satisfy x0 < x1 and y0 < y1".into(),
            ));
        }
        // Each map must send the box into itself; affine images of a convex
        // set are convex, so checking the four corners suffices.
        for (m, map) in self.maps.iter().enumerate() {
            for (cx, cy) in [(x0, y0), (x0, y1), (x1, y0), (x1, y1)] {
                let (ix, iy) = map.apply(cx, cy);
                if &ix < x0 || &ix > x1 || &iy < y0 || &iy > y1 {
                    return Err(Error::Validation(format!(
                        "map {m} sends bbox corner ({}, {}) outside the bbox",
                        rat_to_string(cx),
                        rat_to_string(cy)
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "type": "affine2d",
            "maps": self.maps.iter().map(|m| {
                json!({
                    "a": rat_to_string(&m.a), "b": rat_to_string(&m.b),
                    "c": rat_to_string(&m.c), "d": rat_to_string(&m.d),
                    "e": rat_to_string(&m.e), "f": rat_to_string(&m.f),
                })
            }).collect::<Vec<_>>(),
            "bbox": self.bbox.iter().map(rat_to_string).collect::<Vec<_>>(),
        })
    }
}

/// Either kind of parsed instance document.
#[derive(Debug, Clone, PartialEq)]
#[allow(clippy::large_enum_variant)]
pub enum Instance {
    Finite(FiniteInstance),
    Affine2d(AffineInstance),
}

impl Instance {
    pub fn as_finite(&self) -> Result<&FiniteInstance> {
        match self {
            Instance::Finite(f) => Ok(f),
            Instance::Affine2d(_) => Err(Error::Precondition(
                "this operation requires a finite instance".into(),
            )),
        }
    }

    pub fn as_affine(&self) -> Result<&AffineInstance> {
        match self {
            Instance::Affine2d(a) => Ok(a),
            Instance::Finite(_) => Err(Error::Precondition(
                "this operation requires an affine2d instance".into(),
            )),
        }
    }
}

/// Parses and validates an instance document.
pub fn parse_instance(document: &str) -> Result<Instance> {
    let value: Value = serde_json::from_str(document)
        .map_err(|e| Error::parse("$", format!("invalid JSON: {e}")))?;
    let obj = value
        .as_object()
        .ok_or_else(|| Error::parse("$", "expected an object"))?;
    let ty = obj
        .get("type")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::parse("$.type", "missing or non-string"))?;
    match ty {
        "finite" => parse_finite(obj).map(Instance::Finite),
        "affine2d" => parse_affine(obj).map(Instance::Affine2d),
        other => Err(Error::parse(
            "$.type",
            format!("unknown instance type {other:?}"),
        )),
    }
}

fn parse_finite(obj: &Map<String, Value>) -> Result<FiniteInstance> {
    let name = match obj.get("name") {
        None | Some(Value::Null) => None,
        Some(Value::String(s)) => Some(s.clone()),
        Some(other) => {
            return Err(Error::parse(
                "$.name",
                format!("expected string, got {other}"),
            ))
        }
    };
    let points = obj
        .get("points")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::parse("$.points", "missing or not a nonnegative integer"))?
        as usize;
    let maps_value = obj
        .get("maps")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::parse("$.maps", "missing or not an array"))?;
    let mut maps = Vec::with_capacity(maps_value.len());
    for (m, row) in maps_value.iter().enumerate() {
        let row = row
            .as_array()
            .ok_or_else(|| Error::parse(format!("$.maps[{m}]"), "expected an array"))?;
        let mut table = Vec::with_capacity(row.len());
        for (x, entry) in row.iter().enumerate() {
            let y = entry.as_u64().ok_or_else(|| {
                Error::parse(
                    format!("$.maps[{m}][{x}]"),
                    "expected a nonnegative integer",
                )
            })? as usize;
            table.push(y);
        }
        maps.push(table);
    }
    let mut inst = FiniteInstance::new(points, maps)?;
    inst.name = name;
    Ok(inst)
}

fn parse_affine(obj: &Map<String, Value>) -> Result<AffineInstance> {
    let maps_value = obj
        .get("maps")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::parse("$.maps", "missing or not an array"))?;
    let mut maps = Vec::with_capacity(maps_value.len());
    for (m, entry) in maps_value.iter().enumerate() {
        let entry = entry
            .as_object()
            .ok_or_else(|| Error::parse(format!("$.maps[{m}]"), "expected an object"))?;
        let coeff = |key: &str| -> Result<Rat> {
            let path = format!("$.maps[{m}].{key}");
            let v = entry
                .get(key)
                .ok_or_else(|| Error::parse(path.clone(), "missing"))?;
            rat_from_json(v, &path)
        };
        maps.push(AffineMap {
            a: coeff("a")?,
            b: coeff("b")?,
            c: coeff("c")?,
            d: coeff("d")?,
            e: coeff("e")?,
            f: coeff("f")?,
        });
    }
    let bbox_value = obj
        .get("bbox")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::parse("$.bbox", "missing or not an array"))?;
    if bbox_value.len() != 4 {
        return Err(Error::parse("$.bbox", "expected [x0, y0, x1, y1]"));
    }
    let mut bbox = Vec::with_capacity(4);
    for (i, v) in bbox_value.iter().enumerate() {
        bbox.push(rat_from_json(v, &format!("$.bbox[{i}]"))?);
    }
    let inst = AffineInstance {
        maps,
        bbox: [
            bbox[0].clone(),
            bbox[1].clone(),
            bbox[2].clone(),
            bbox[3].clone(),
        ],
    };
    inst.validate()?;
    Ok(inst)
}

/// Serializes an instance; `parse_instance(serialize_instance(x)) == x`.
pub fn serialize_instance(inst: &Instance) -> String {
    let value = match inst {
        Instance::Finite(f) => f.to_json(),
        Instance::Affine2d(a) => a.to_json(),
    };
    serde_json::to_string_pretty(&value).expect("JSON value serializes")
}

/// A named bundled instance.
#[derive(Debug, Clone)]
pub struct Fixture {
    pub name: &'static str,
    pub instance: FiniteInstance,
}

/// The bundled test family. `T3` is the only one without an attractor.
pub fn fixtures() -> Vec<Fixture> {
    let f = |name, points, maps: Vec<Vec<usize>>| Fixture {
        name,
        instance: FiniteInstance::named(name, points, maps).expect("fixtures are valid"),
    };
    vec![
        f("two-constants", 3, vec![vec![0, 0, 0], vec![1, 1, 1]]),
        f("binary-shift", 4, vec![vec![0, 0, 1, 1], vec![2, 2, 3, 3]]),
        f("swap-fail", 2, vec![vec![1, 0]]),
        f("common-fixed", 3, vec![vec![0, 0, 0], vec![0, 0, 1]]),
        f("bessaga-chain", 3, vec![vec![0, 0, 1]]),
    ]
}

/// Looks a fixture up by its name or its `T1`..`T5` shorthand.
pub fn fixture(name: &str) -> Option<FiniteInstance> {
    let all = fixtures();
    let by_alias = match name {
        "T1" => Some(0),
        "T2" => Some(1),
        "T3" => Some(2),
        "T4" => Some(3),
        "T5" => Some(4),
        _ => None,
    };
    if let Some(i) = by_alias {
        return Some(all[i].instance.clone());
    }
    all.into_iter()
        .find(|fx| fx.name == name)
        .map(|fx| fx.instance)
}

/// The classic three-map demo for the renderer: corners of a triangle, each
/// map contracting by 1/2.
pub fn sierpinski() -> AffineInstance {
    use crate::ratio::{rat, rat_int};
    let half = rat(1, 2);
    let zero = rat_int(0);
    let mk = |e: Rat, f: Rat| AffineMap {
        a: half.clone(),
        b: zero.clone(),
        c: zero.clone(),
        d: half.clone(),
        e,
        f,
    };
    let inst = AffineInstance {
        maps: vec![
            mk(rat_int(0), rat_int(0)),
            mk(half.clone(), rat_int(0)),
            mk(rat(1, 4), half.clone()),
        ],
        bbox: [rat_int(0), rat_int(0), rat_int(1), rat_int(1)],
    };
    inst.validate().expect("demo instance is valid");
    inst
}
