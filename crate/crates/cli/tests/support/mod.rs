#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

pub fn scdm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scdm"))
        .args(args)
        .output()
        .expect("binary runs")
}

pub fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn files(root: &Path, dir: &Path, out: &mut Vec<PathBuf>) {
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            files(root, &p, out);
        } else {
            out.push(p.strip_prefix(root).unwrap().to_path_buf());
        }
    }
}

/// Digest over every relative path and its bytes, in path order.
pub fn hash_dir(dir: &Path) -> String {
    let mut list = Vec::new();
    files(dir, dir, &mut list);
    list.sort();
    let mut h = Sha256::new();
    for rel in list {
        h.update(rel.to_string_lossy().as_bytes());
        h.update([0]);
        h.update(fs::read(dir.join(&rel)).unwrap());
        h.update([0]);
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}
