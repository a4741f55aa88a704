//! `drift gen-basis`: write the modal-basis binary export and a long-format
//! CSV of the first few mode shapes for external plotting.

use clap::Args;
use drift_core::modal::build_basis;
use drift_core::{Error, Real, Result};
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

#[derive(Args, Debug)]
pub struct GenBasisArgs {
    /// Number of modes (rows of the basis)
    #[arg(long, value_name = "N")]
    pub modes: usize,

    /// Grid width in pixels
    #[arg(long, value_name = "W")]
    pub width: usize,

    /// Grid height in pixels
    #[arg(long, value_name = "H")]
    pub height: usize,

    /// Output file for the binary basis; a CSV of the first min(N, 9) mode
    /// shapes is written next to it with the extension replaced by .csv
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
}

pub fn run(args: GenBasisArgs) -> Result<()> {
    if args.modes == 0 {
        return Err(Error::invalid("--modes must be at least 1"));
    }
    if args.width == 0 {
        return Err(Error::invalid("--width must be at least 1"));
    }
    if args.height == 0 {
        return Err(Error::invalid("--height must be at least 1"));
    }
    let basis = build_basis::<Real>(args.modes, args.width, args.height)?;
    basis.write_binary(&args.out)?;

    let csv_path = args.out.with_extension("csv");
    let file = File::create(&csv_path).map_err(|e| Error::io(&csv_path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| Error::io(&csv_path, e);
    writeln!(w, "mode_index,n,m,x,y,value").map_err(io)?;
    for (k, mode) in basis.modes().iter().take(9).enumerate() {
        let row = basis.row(k);
        for y in 0..args.height {
            for x in 0..args.width {
                writeln!(
                    w,
                    "{k},{},{},{x},{y},{}",
                    mode.n,
                    mode.m,
                    row[y * args.width + x]
                )
                .map_err(io)?;
            }
        }
    }
    w.flush().map_err(io)?;

    println!(
        "wrote {} ({} modes on {}x{}) and {}",
        args.out.display(),
        basis.len(),
        args.width,
        args.height,
        csv_path.display()
    );
    Ok(())
}
