//! JSON persistence for groups, instances and filtration chains.
//!
//! Group files look like
//! `{"order", "identity", "mult": [row-major], "dist": [row-major rationals], "meta"}`.
//! Large groups may store `"dist": {"values": [rationals], "index": [row-major u32]}`
//! instead; both forms load identically. Every load re-validates the tables and
//! moves the identity to index 0.

use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::Signed;

use crate::approx::Filtration;
use crate::error::{Error, Result};
use crate::group::{FiniteMetricGroup, GroupTables, Label};
use crate::rational::{self, Rational};
use crate::zoo::InstanceSpec;
use crate::ElementSet;

/// Orders above this are written with the interned distance encoding.
pub const DENSE_LIMIT: usize = 512;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DistEncoding {
    /// Row-major matrix of rationals.
    Dense,
    /// Distinct values plus a row-major index matrix.
    Interned,
}

impl DistEncoding {
    pub fn for_order(n: usize) -> Self {
        if n <= DENSE_LIMIT {
            DistEncoding::Dense
        } else {
            DistEncoding::Interned
        }
    }
}

/// Integer that may be a JSON number or, when large, a decimal string.
struct Int(BigInt);

impl<'de> Deserialize<'de> for Int {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Int;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an integer or a decimal string")
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Int, E> {
                Ok(Int(v.into()))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Int, E> {
                Ok(Int(v.into()))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Int, E> {
                v.parse().map(Int).map_err(|_| E::custom(format!("bad integer `{v}`")))
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Deserialize)]
struct RatRepr {
    num: Int,
    den: Int,
}

impl RatRepr {
    fn into_rational<E: de::Error>(self) -> std::result::Result<Rational, E> {
        if !self.den.0.is_positive() {
            return Err(E::custom("rational denominator must be positive"));
        }
        Ok(Rational::new(self.num.0, self.den.0))
    }
}

fn rationals<'de, A: SeqAccess<'de>>(mut seq: A) -> std::result::Result<Vec<Rational>, A::Error> {
    let mut out = Vec::with_capacity(seq.size_hint().unwrap_or(0));
    while let Some(r) = seq.next_element::<RatRepr>()? {
        out.push(r.into_rational()?);
    }
    Ok(out)
}

struct RationalList(Vec<Rational>);

impl<'de> Deserialize<'de> for RationalList {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = RationalList;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a list of rationals")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, seq: A) -> std::result::Result<RationalList, A::Error> {
                rationals(seq).map(RationalList)
            }
        }
        d.deserialize_seq(V)
    }
}

enum DistField {
    Dense(Vec<Rational>),
    Interned { values: Vec<Rational>, index: Vec<u32> },
}

struct GroupFileIn {
    order: usize,
    identity: usize,
    mult: Vec<u32>,
    dist: DistField,
    labels: Option<Vec<Label>>,
    meta: Value,
}

/// Cursor over a group file. Small values go through serde_json; the large
/// integer tables (`mult`, `dist.index`) are scanned directly, since at tens
/// of millions of entries the generic visitor dominates load time.
struct Reader<'a> {
    b: &'a [u8],
    i: usize,
}

impl Reader<'_> {
    fn err(&self, msg: impl fmt::Display) -> Error {
        Error::Parse(format!("group file at byte {}: {msg}", self.i))
    }

    fn peek(&mut self) -> Option<u8> {
        while self.i < self.b.len() && self.b[self.i].is_ascii_whitespace() {
            self.i += 1;
        }
        self.b.get(self.i).copied()
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() != Some(c) {
            return Err(self.err(format!("expected `{}`", c as char)));
        }
        self.i += 1;
        Ok(())
    }

    fn value<T: de::DeserializeOwned>(&mut self) -> Result<T> {
        self.peek();
        let mut it = serde_json::Deserializer::from_slice(&self.b[self.i..]).into_iter::<T>();
        match it.next() {
            Some(Ok(v)) => {
                self.i += it.byte_offset();
                Ok(v)
            }
            Some(Err(e)) => Err(self.err(e)),
            None => Err(self.err("unexpected end of input")),
        }
    }

    /// Visits the members of an object, leaving the cursor after its `}`.
    fn object(&mut self, mut field: impl FnMut(&mut Self, String) -> Result<()>) -> Result<()> {
        self.expect(b'{')?;
        if self.peek() == Some(b'}') {
            self.i += 1;
            return Ok(());
        }
        loop {
            let key: String = self.value()?;
            self.expect(b':')?;
            field(self, key)?;
            match self.peek() {
                Some(b',') => self.i += 1,
                Some(b'}') => {
                    self.i += 1;
                    return Ok(());
                }
                _ => return Err(self.err("expected `,` or `}`")),
            }
        }
    }

    fn u32_array(&mut self) -> Result<Vec<u32>> {
        self.expect(b'[')?;
        let mut out = Vec::new();
        if self.peek() == Some(b']') {
            self.i += 1;
            return Ok(out);
        }
        loop {
            self.peek();
            let (b, start) = (self.b, self.i);
            let mut v: u64 = 0;
            while self.i < b.len() && b[self.i].is_ascii_digit() && v <= u32::MAX as u64 {
                v = v * 10 + (b[self.i] - b'0') as u64;
                self.i += 1;
            }
            if self.i == start || v > u32::MAX as u64 {
                return Err(self.err("expected an integer in the u32 range"));
            }
            out.push(v as u32);
            match self.peek() {
                Some(b',') => self.i += 1,
                Some(b']') => {
                    self.i += 1;
                    return Ok(out);
                }
                _ => return Err(self.err("expected `,` or `]`")),
            }
        }
    }

    fn dist(&mut self) -> Result<DistField> {
        if self.peek() == Some(b'[') {
            return Ok(DistField::Dense(self.value::<RationalList>()?.0));
        }
        let (mut values, mut index) = (None, None);
        self.object(|r, key| {
            match key.as_str() {
                "values" => values = Some(r.value::<RationalList>()?.0),
                "index" => index = Some(r.u32_array()?),
                other => return Err(r.err(format!("unknown field `{other}` in dist"))),
            }
            Ok(())
        })?;
        match (values, index) {
            (Some(values), Some(index)) => Ok(DistField::Interned { values, index }),
            _ => Err(self.err("dist needs both `values` and `index`")),
        }
    }
}

fn parse_group_file(bytes: &[u8]) -> Result<GroupFileIn> {
    let mut r = Reader { b: bytes, i: 0 };
    let (mut order, mut identity, mut mult, mut dist) = (None, None, None, None);
    let (mut labels, mut meta) = (None, Value::Null);
    r.object(|r, key| {
        match key.as_str() {
            "order" => order = Some(r.value()?),
            "identity" => identity = Some(r.value()?),
            "mult" => mult = Some(r.u32_array()?),
            "dist" => dist = Some(r.dist()?),
            "labels" => labels = r.value()?,
            "meta" => meta = r.value()?,
            _ => {
                r.value::<de::IgnoredAny>()?;
            }
        }
        Ok(())
    })?;
    if r.peek().is_some() {
        return Err(r.err("trailing characters"));
    }
    let missing = |f: &str| Error::Parse(format!("group file: missing field `{f}`"));
    Ok(GroupFileIn {
        order: order.ok_or_else(|| missing("order"))?,
        identity: identity.ok_or_else(|| missing("identity"))?,
        mult: mult.ok_or_else(|| missing("mult"))?,
        dist: dist.ok_or_else(|| missing("dist"))?,
        labels,
        meta,
    })
}

/// Appends `[a,b,...]` to `out`.
fn write_u32_array(out: &mut Vec<u8>, xs: &[u32]) {
    out.reserve(xs.len() * 6 + 2);
    out.push(b'[');
    let mut digits = [0u8; 10];
    for (k, &x) in xs.iter().enumerate() {
        if k > 0 {
            out.push(b',');
        }
        let (mut v, mut n) = (x, 0);
        loop {
            digits[n] = b'0' + (v % 10) as u8;
            n += 1;
            v /= 10;
            if v == 0 {
                break;
            }
        }
        out.extend(digits[..n].iter().rev());
    }
    out.push(b']');
}

struct RatOut<'a>(&'a Rational);

impl Serialize for RatOut<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        rational::json::serialize(self.0, s)
    }
}

struct DenseDist<'a>(&'a GroupTables);

impl Serialize for DenseDist<'_> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let t = self.0;
        let mut seq = s.serialize_seq(Some(t.dist_index.len()))?;
        for &i in &t.dist_index {
            seq.serialize_element(&RatOut(&t.dist_values[i as usize]))?;
        }
        seq.end()
    }
}

fn file_meta(g: &FiniteMetricGroup) -> Value {
    let mut meta = match g.meta() {
        Value::Object(o) => Value::Object(o.clone()),
        _ => serde_json::json!({}),
    };
    meta["bi_invariant"] = Value::Bool(g.is_bi_invariant());
    meta
}

/// Writes `g` as a group file with the given distance encoding.
pub fn write_group(g: &FiniteMetricGroup, mut out: impl Write, encoding: DistEncoding) -> Result<()> {
    let t = g.tables();
    let mut buf = format!("{{\"order\":{},\"identity\":{},\"mult\":", t.order, t.identity).into_bytes();
    write_u32_array(&mut buf, &t.mult);
    buf.extend_from_slice(b",\"dist\":");
    match encoding {
        DistEncoding::Dense => serde_json::to_writer(&mut buf, &DenseDist(&t))?,
        DistEncoding::Interned => {
            let values: Vec<RatOut> = t.dist_values.iter().map(RatOut).collect();
            buf.extend_from_slice(b"{\"values\":");
            serde_json::to_writer(&mut buf, &values)?;
            buf.extend_from_slice(b",\"index\":");
            write_u32_array(&mut buf, &t.dist_index);
            buf.push(b'}');
        }
    }
    if let Some(labels) = &t.labels {
        buf.extend_from_slice(b",\"labels\":");
        serde_json::to_writer(&mut buf, labels)?;
    }
    buf.extend_from_slice(b",\"meta\":");
    serde_json::to_writer(&mut buf, &file_meta(g))?;
    buf.push(b'}');
    out.write_all(&buf)?;
    out.flush()?;
    Ok(())
}

/// Writes `g` to `path`, choosing the encoding from the order.
pub fn save_group(g: &FiniteMetricGroup, path: impl AsRef<Path>) -> Result<()> {
    write_group(g, fs::File::create(path)?, DistEncoding::for_order(g.order()))
}

/// The group file as bytes (used for hashing and embedding).
pub fn group_bytes(g: &FiniteMetricGroup, encoding: DistEncoding) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_group(g, &mut buf, encoding)?;
    Ok(buf)
}

fn tables_from_file(f: GroupFileIn) -> Result<(GroupTables, Value)> {
    let n = f.order;
    let mut tables = match f.dist {
        DistField::Dense(dist) => {
            if dist.len() != n * n {
                return Err(Error::Structural(format!("distance matrix has {} entries, expected {}", dist.len(), n * n)));
            }
            GroupTables::new(n, f.identity, f.mult, &dist)
        }
        DistField::Interned { values, index } => {
            if let Some(&bad) = index.iter().find(|&&i| i as usize >= values.len()) {
                return Err(Error::Structural(format!("distance index {bad} out of range")));
            }
            let mut sorted = values.clone();
            sorted.sort();
            sorted.dedup();
            let remap: Vec<u32> = values
                .iter()
                .map(|v| sorted.binary_search(v).expect("value present") as u32)
                .collect();
            GroupTables {
                order: n,
                identity: f.identity,
                mult: f.mult,
                dist_values: sorted,
                dist_index: index.iter().map(|&i| remap[i as usize]).collect(),
                labels: None,
            }
        }
    };
    tables.labels = f.labels;
    Ok((tables, f.meta))
}

/// Maps file indices to loaded indices (the identity moves to 0).
fn index_map(identity: usize) -> impl Fn(usize) -> usize {
    move |i| {
        if i == identity {
            0
        } else if i == 0 {
            identity
        } else {
            i
        }
    }
}

fn group_from_reader(bytes: &[u8]) -> Result<(Arc<FiniteMetricGroup>, usize)> {
    let file = parse_group_file(bytes)?;
    let identity = file.identity;
    let (tables, meta) = tables_from_file(file)?;
    let g = FiniteMetricGroup::new(tables)?;
    let mut meta = match meta {
        Value::Object(o) => Value::Object(o),
        _ => serde_json::json!({}),
    };
    meta["bi_invariant"] = Value::Bool(g.is_bi_invariant());
    Ok((g.with_meta(meta).into_shared(), identity))
}

/// Parses a group file without validating it.
pub fn read_tables(bytes: &[u8]) -> Result<GroupTables> {
    let file = parse_group_file(bytes)?;
    tables_from_file(file).map(|(t, _)| t)
}

/// Reads and validates a group file.
pub fn read_group(bytes: &[u8]) -> Result<Arc<FiniteMetricGroup>> {
    group_from_reader(bytes).map(|(g, _)| g)
}

pub fn load_group(path: impl AsRef<Path>) -> Result<Arc<FiniteMetricGroup>> {
    read_group(&fs::read(path)?)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// How an instance file refers to its group.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GroupRef {
    /// A group file, resolved relative to the instance file, with the
    /// SHA-256 of its bytes.
    Path { path: PathBuf, sha256: String },
    Embedded(Value),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct InstanceFile {
    group: GroupRef,
    set: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    spec: Option<InstanceSpec>,
}

/// A group together with a subset `X`, as stored in an instance file.
#[derive(Clone, Debug)]
pub struct Instance {
    pub group: Arc<FiniteMetricGroup>,
    pub set: ElementSet,
    pub spec: Option<InstanceSpec>,
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.parent().unwrap_or(Path::new(".")).join(p)
    }
}

fn load_group_ref(r: &GroupRef, relative_to: &Path) -> Result<(Arc<FiniteMetricGroup>, usize)> {
    match r {
        GroupRef::Embedded(v) => group_from_reader(&serde_json::to_vec(v)?),
        GroupRef::Path { path, sha256 } => {
            let full = resolve(relative_to, path);
            let bytes = fs::read(&full)?;
            let actual = sha256_hex(&bytes);
            if !actual.eq_ignore_ascii_case(sha256) {
                return Err(Error::Parse(format!(
                    "group file {} has sha256 {actual}, instance expects {sha256}",
                    full.display()
                )));
            }
            group_from_reader(&bytes)
        }
    }
}

fn set_from_indices(g: &Arc<FiniteMetricGroup>, file_identity: usize, idx: &[usize]) -> Result<ElementSet> {
    if let Some(&bad) = idx.iter().find(|&&i| i >= g.order()) {
        return Err(Error::Structural(format!("set element {bad} out of range")));
    }
    let map = index_map(file_identity);
    Ok(ElementSet::from_indices(g, idx.iter().map(|&i| map(i))))
}

/// Writes an instance embedding its group.
pub fn save_instance(path: impl AsRef<Path>, inst: &Instance) -> Result<()> {
    let embedded: Value = serde_json::from_slice(&group_bytes(&inst.group, DistEncoding::for_order(inst.group.order()))?)?;
    let file = InstanceFile { group: GroupRef::Embedded(embedded), set: inst.set.to_vec(), spec: inst.spec.clone() };
    fs::write(path, serde_json::to_vec(&file)?)?;
    Ok(())
}

/// Writes an instance referring to an existing group file, recording its hash.
/// `group_path` is stored as given and resolved relative to `path` on load.
pub fn save_instance_ref(path: impl AsRef<Path>, group_path: impl AsRef<Path>, inst: &Instance) -> Result<()> {
    let path = path.as_ref();
    let bytes = fs::read(resolve(path, group_path.as_ref()))?;
    let file = InstanceFile {
        group: GroupRef::Path { path: group_path.as_ref().to_path_buf(), sha256: sha256_hex(&bytes) },
        set: inst.set.to_vec(),
        spec: inst.spec.clone(),
    };
    fs::write(path, serde_json::to_vec(&file)?)?;
    Ok(())
}

/// Loads a group file and a subset given in the file's indexing.
pub fn load_group_subset(path: impl AsRef<Path>, set: &[usize]) -> Result<Instance> {
    let (group, id) = group_from_reader(&fs::read(path)?)?;
    let set = set_from_indices(&group, id, set)?;
    Ok(Instance { group, set, spec: None })
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance> {
    let path = path.as_ref();
    let file: InstanceFile = serde_json::from_slice(&fs::read(path)?)?;
    let (group, id) = load_group_ref(&file.group, path)?;
    let set = set_from_indices(&group, id, &file.set)?;
    Ok(Instance { group, set, spec: file.spec })
}

/// Filtration file: `{"group", "base": [..], "chain": [[..], ..], "r_s", "c"}`
/// with `chain[0] = X_0` the largest member.
#[derive(Clone, Debug, Serialize, Deserialize)]
struct FiltrationFile {
    group: GroupRef,
    base: Vec<usize>,
    chain: Vec<Vec<usize>>,
    #[serde(with = "rational::json")]
    r_s: Rational,
    c: usize,
}

pub fn save_filtration(path: impl AsRef<Path>, f: &Filtration) -> Result<()> {
    let g = f.base().group();
    let embedded: Value = serde_json::from_slice(&group_bytes(g, DistEncoding::for_order(g.order()))?)?;
    let file = FiltrationFile {
        group: GroupRef::Embedded(embedded),
        base: f.base().to_vec(),
        chain: f.chain().iter().map(ElementSet::to_vec).collect(),
        r_s: f.r_s().clone(),
        c: f.c(),
    };
    fs::write(path, serde_json::to_vec(&file)?)?;
    Ok(())
}

pub fn load_filtration(path: impl AsRef<Path>) -> Result<Filtration> {
    let path = path.as_ref();
    let file: FiltrationFile = serde_json::from_slice(&fs::read(path)?)?;
    let (g, id) = load_group_ref(&file.group, path)?;
    let base = set_from_indices(&g, id, &file.base)?;
    let chain = file.chain.iter().map(|c| set_from_indices(&g, id, c)).collect::<Result<Vec<_>>>()?;
    Filtration::new(base, chain, file.r_s, file.c)
}
