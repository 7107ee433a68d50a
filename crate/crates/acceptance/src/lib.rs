//! Reporting and fixture lookup for the acceptance target.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::Instant;

pub type Check = Result<String, String>;

#[derive(Default)]
pub struct Report {
    failed: Vec<String>,
    total: usize,
}

impl Report {
    /// Runs one criterion and prints `PASS`/`FAIL` with its detail line.
    pub fn run(&mut self, id: &str, title: &str, f: impl FnOnce() -> Check) {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        self.total += 1;
        match outcome {
            Ok(detail) => println!("PASS {id:>3}  {title}: {detail} [{secs:.1}s]"),
            Err(detail) => {
                println!("FAIL {id:>3}  {title}: {detail} [{secs:.1}s]");
                self.failed.push(id.to_string());
            }
        }
    }

    pub fn finish(self) -> ! {
        println!("\n{} of {} criteria passed", self.total - self.failed.len(), self.total);
        if self.failed.is_empty() {
            std::process::exit(0);
        }
        println!("failed: {}", self.failed.join(", "));
        std::process::exit(1);
    }
}

/// `Err(msg)` unless `cond`.
pub fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

pub fn workspace_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

/// ARC root from `ARC_VAS_DATA`, else `<workspace>/data/arc`.
pub fn arc_dir() -> Option<PathBuf> {
    let dir = std::env::var_os("ARC_VAS_DATA").map(PathBuf::from).unwrap_or_else(|| workspace_root().join("data/arc"));
    dir.join("training").is_dir().then_some(dir)
}

/// Trained checkpoint from `ARC_VAS_CHECKPOINT`, else `<workspace>/artifacts/best.ckpt`.
pub fn checkpoint() -> Option<PathBuf> {
    let p = std::env::var_os("ARC_VAS_CHECKPOINT").map(PathBuf::from).unwrap_or_else(|| workspace_root().join("artifacts/best.ckpt"));
    p.is_file().then_some(p)
}

/// ConceptARC corpus root (one sub-directory per concept) from `ARC_VAS_CONCEPTARC`.
pub fn conceptarc_dir() -> Option<PathBuf> {
    std::env::var_os("ARC_VAS_CONCEPTARC").map(PathBuf::from).filter(|p| p.is_dir())
}
