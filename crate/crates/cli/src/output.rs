use std::io::Write;
use std::thread;

use anyhow::{Context, Result};
use serde_json::Value;

use crate::{Common, Format};

/// 17 significant digits, enough to round-trip any `f64`.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `text` to `--out` or stdout.
pub fn emit(common: &Common, text: &str) -> Result<()> {
    match &common.out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

pub fn render(common: &Common, json: &Value, csv: impl FnOnce() -> String) -> String {
    match common.format {
        Format::Json => format!("{}\n", serde_json::to_string_pretty(json).expect("serializable")),
        Format::Csv => csv(),
    }
}

/// Worker count: `LAXPI_THREADS` if set, else the available parallelism.
pub fn thread_cap() -> usize {
    std::env::var("LAXPI_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Maps `f` over `items` on at most [`thread_cap`] threads; results keep input order.
pub fn fan_out<I, R, F>(items: Vec<I>, f: F) -> Vec<R>
where
    I: Send,
    R: Send,
    F: Fn(I) -> R + Sync,
{
    let workers = thread_cap().min(items.len()).max(1);
    if workers == 1 {
        return items.into_iter().map(f).collect();
    }
    let mut chunks: Vec<Vec<(usize, I)>> = (0..workers).map(|_| Vec::new()).collect();
    for (i, item) in items.into_iter().enumerate() {
        chunks[i % workers].push((i, item));
    }
    let f = &f;
    let mut results: Vec<(usize, R)> = thread::scope(|s| {
        let handles: Vec<_> = chunks
            .into_iter()
            .map(|chunk| s.spawn(move || chunk.into_iter().map(|(i, x)| (i, f(x))).collect::<Vec<_>>()))
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    });
    results.sort_by_key(|r| r.0);
    results.into_iter().map(|r| r.1).collect()
}
