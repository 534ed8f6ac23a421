//! Minimal stderr logger driven by ATTRACTA_LOG in {error, info, debug}.

use std::sync::OnceLock;

#[derive(PartialEq, PartialOrd, Clone, Copy)]
pub enum Level {
    Error = 0,
    Info = 1,
    Debug = 2,
}

static LEVEL: OnceLock<Level> = OnceLock::new();

pub fn init() {
    let level = match std::env::var("ATTRACTA_LOG").as_deref() {
        Ok("debug") => Level::Debug,
        Ok("info") => Level::Info,
        _ => Level::Error,
    };
    let _ = LEVEL.set(level);
}

fn level() -> Level {
    *LEVEL.get().unwrap_or(&Level::Error)
}

pub fn info(msg: &str) {
    if level() >= Level::Info {
        eprintln!("info: {msg}");
    }
}

#[allow(dead_code)]
pub fn debug(msg: &str) {
    if level() >= Level::Debug {
        eprintln!("debug: {msg}");
    }
}
