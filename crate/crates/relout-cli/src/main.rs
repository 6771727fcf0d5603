use std::io::Write;
use std::path::Path;

use anyhow::Context;

fn write_atomic(path: &Path, data: &str) -> anyhow::Result<()> {
    let tmp = path.with_extension("tmp~");
    std::fs::write(&tmp, data).with_context(|| format!("writing {}", tmp.display()))?;
    std::fs::rename(&tmp, path).with_context(|| format!("renaming onto {}", path.display()))?;
    Ok(())
}

fn main() {
    let out = relout_cli::run(std::env::args_os(), &mut std::io::stdin());
    let written = match &out.out {
        Some(p) => write_atomic(p, &out.report),
        None => std::io::stdout().write_all(out.report.as_bytes()).context("writing stdout"),
    };
    if let Err(e) = written {
        eprintln!("relout: {e:#}");
        std::process::exit(relout_cli::EXIT_ERROR);
    }
    std::process::exit(out.code);
}
