//! On-disk formats: a raw little-endian table file and a one-line JSON
//! descriptor per hasher.
//!
//! Table file layout: a 16-byte header — magic `TABH`, then `char_bits`,
//! `entry_bits` and the table count as little-endian u32 — followed by the
//! tables in order, each entry written as `ceil(entry_bits / 8)` bytes
//! little-endian.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Result, TabError};
use crate::hashers::{DoubleTab, HeadPos, MixedTab, SimpleTab, TwistedTab};
use crate::keyspace::{entry_width, mask, CharTable, TabConfig};

const MAGIC: &[u8; 4] = b"TABH";

pub fn write_tables(path: &Path, char_bits: u32, tables: &[CharTable]) -> Result<()> {
    let entry_bits = tables
        .first()
        .map(|t| t.entry_bits())
        .ok_or_else(|| TabError::Input("no tables to write".into()))?;
    if tables.iter().any(|t| t.entry_bits() != entry_bits) {
        return Err(TabError::Input(
            "tables in one file must share entry_bits".into(),
        ));
    }
    let sigma = 1usize << char_bits;
    if tables.iter().any(|t| t.len() != sigma) {
        return Err(TabError::Input(format!(
            "tables in one file must have 2^char_bits = {sigma} entries"
        )));
    }
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&char_bits.to_le_bytes())?;
    w.write_all(&entry_bits.to_le_bytes())?;
    w.write_all(&(tables.len() as u32).to_le_bytes())?;
    let width = entry_width(entry_bits);
    for t in tables {
        for &e in t.entries() {
            w.write_all(&e.to_le_bytes()[..width])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_tables(path: &Path) -> Result<(u32, Vec<CharTable>)> {
    let mut r = BufReader::new(File::open(path)?);
    let mut header = [0u8; 16];
    r.read_exact(&mut header)?;
    if &header[..4] != MAGIC {
        return Err(TabError::Input(format!(
            "{} is not a table file (bad magic)",
            path.display()
        )));
    }
    let word = |i: usize| u32::from_le_bytes(header[i..i + 4].try_into().expect("4 bytes"));
    let char_bits = word(4);
    let entry_bits = word(8);
    let count = word(12);
    if !(1..=16).contains(&char_bits) || !(1..=64).contains(&entry_bits) {
        return Err(TabError::Input(format!(
            "table file header out of range: char_bits {char_bits}, entry_bits {entry_bits}"
        )));
    }
    let sigma = 1usize << char_bits;
    let width = entry_width(entry_bits);
    let m = mask(entry_bits);
    let mut tables = Vec::with_capacity(count as usize);
    let mut buf = vec![0u8; sigma * width];
    for _ in 0..count {
        r.read_exact(&mut buf)?;
        let entries = buf
            .chunks_exact(width)
            .map(|chunk| {
                let mut v = 0u64;
                for (b, &byte) in chunk.iter().enumerate() {
                    v |= (byte as u64) << (8 * b);
                }
                v & m
            })
            .collect();
        tables.push(CharTable::new(entries, entry_bits)?);
    }
    Ok((char_bits, tables))
}

/// The one-line JSON descriptor accompanying serialized hashers.
#[derive(Debug, Serialize, Deserialize)]
pub struct HasherDescriptor {
    pub kind: String,
    pub char_bits: u32,
    pub chars: u32,
    pub out_bits: u32,
    pub derived_chars: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub head: Option<HeadPos>,
    pub table_files: Vec<String>,
}

impl HasherDescriptor {
    pub fn cfg(&self) -> Result<TabConfig> {
        TabConfig::new(self.char_bits, self.chars, self.out_bits, self.derived_chars)
    }
}

fn write_descriptor(base: &Path, desc: &HasherDescriptor) -> Result<()> {
    let mut f = File::create(base.with_extension("json"))?;
    let line = serde_json::to_string(desc).map_err(|e| TabError::Input(e.to_string()))?;
    writeln!(f, "{line}")?;
    Ok(())
}

fn read_descriptor(base: &Path) -> Result<HasherDescriptor> {
    let text = std::fs::read_to_string(base.with_extension("json"))?;
    serde_json::from_str(text.trim()).map_err(|e| TabError::Input(e.to_string()))
}

fn side_file(base: &Path, suffix: &str) -> PathBuf {
    let mut name = base
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_default();
    name.push(".");
    name.push(suffix);
    name.push(".tab");
    base.with_file_name(name)
}

fn desc_for(cfg: &TabConfig, kind: &str, head: Option<HeadPos>, files: &[PathBuf]) -> HasherDescriptor {
    HasherDescriptor {
        kind: kind.into(),
        char_bits: cfg.char_bits(),
        chars: cfg.chars(),
        out_bits: cfg.out_bits(),
        derived_chars: cfg.derived_chars(),
        head,
        table_files: files
            .iter()
            .map(|p| {
                p.file_name()
                    .map(|n| n.to_string_lossy().into_owned())
                    .unwrap_or_default()
            })
            .collect(),
    }
}

pub fn save_simple(base: &Path, h: &SimpleTab) -> Result<()> {
    let f = side_file(base, "tables");
    write_tables(&f, h.cfg().char_bits(), h.tables())?;
    write_descriptor(base, &desc_for(h.cfg(), "simple", None, &[f]))
}

pub fn load_simple(base: &Path) -> Result<SimpleTab> {
    let desc = read_descriptor(base)?;
    if desc.kind != "simple" {
        return Err(TabError::Input(format!("descriptor kind {}", desc.kind)));
    }
    let (_, tables) = read_tables(&side_file(base, "tables"))?;
    SimpleTab::from_tables(desc.cfg()?, tables)
}

pub fn save_twisted(base: &Path, h: &TwistedTab) -> Result<()> {
    let star = side_file(base, "star");
    let head = side_file(base, "head");
    write_tables(&star, h.cfg().char_bits(), h.star_tables())?;
    write_tables(&head, h.cfg().char_bits(), std::slice::from_ref(h.head_table()))?;
    write_descriptor(
        base,
        &desc_for(h.cfg(), "twisted", Some(h.head_pos()), &[star, head]),
    )
}

pub fn load_twisted(base: &Path) -> Result<TwistedTab> {
    let desc = read_descriptor(base)?;
    if desc.kind != "twisted" {
        return Err(TabError::Input(format!("descriptor kind {}", desc.kind)));
    }
    let head_pos = desc
        .head
        .ok_or_else(|| TabError::Input("twisted descriptor missing head".into()))?;
    let (_, star) = read_tables(&side_file(base, "star"))?;
    let (_, mut head) = read_tables(&side_file(base, "head"))?;
    let head = head
        .pop()
        .ok_or_else(|| TabError::Input("head table file is empty".into()))?;
    TwistedTab::from_parts(desc.cfg()?, head_pos, star, head)
}

pub fn save_double(base: &Path, h: &DoubleTab) -> Result<()> {
    let inner = side_file(base, "inner");
    let outer = side_file(base, "outer");
    write_tables(&inner, h.cfg().char_bits(), h.inner_tables())?;
    write_tables(&outer, h.cfg().char_bits(), h.outer().tables())?;
    write_descriptor(base, &desc_for(h.cfg(), "double", None, &[inner, outer]))
}

pub fn load_double(base: &Path) -> Result<DoubleTab> {
    let desc = read_descriptor(base)?;
    if desc.kind != "double" {
        return Err(TabError::Input(format!("descriptor kind {}", desc.kind)));
    }
    let cfg = desc.cfg()?;
    let (_, inner) = read_tables(&side_file(base, "inner"))?;
    let (_, outer_tables) = read_tables(&side_file(base, "outer"))?;
    let outer = SimpleTab::from_tables(DoubleTab::outer_cfg(&cfg)?, outer_tables)?;
    DoubleTab::from_parts(cfg, inner, outer)
}

pub fn save_mixed(base: &Path, h: &MixedTab) -> Result<()> {
    let combined = side_file(base, "combined");
    let derived = side_file(base, "derived");
    write_tables(&combined, h.cfg().char_bits(), h.combined_tables())?;
    write_tables(&derived, h.cfg().char_bits(), h.derived_part().tables())?;
    write_descriptor(base, &desc_for(h.cfg(), "mixed", None, &[combined, derived]))
}

pub fn load_mixed(base: &Path) -> Result<MixedTab> {
    let desc = read_descriptor(base)?;
    if desc.kind != "mixed" {
        return Err(TabError::Input(format!("descriptor kind {}", desc.kind)));
    }
    let cfg = desc.cfg()?;
    let (_, combined) = read_tables(&side_file(base, "combined"))?;
    let (_, derived_tables) = read_tables(&side_file(base, "derived"))?;
    let derived = SimpleTab::from_tables(MixedTab::derived_cfg(&cfg)?, derived_tables)?;
    MixedTab::from_parts(cfg, combined, derived)
}
