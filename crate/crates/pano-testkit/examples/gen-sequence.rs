//! Writes a synthetic four-camera sequence to disk so the `pano` CLI can be
//! exercised without real capture data.
//!
//! ```text
//! cargo run -p pano-testkit --example gen-sequence -- <out-dir> [frames] [spacing] [width] [height] [seed]
//! ```
//!
//! Prints the focal length to pass to the CLI via `--f`.

use std::path::PathBuf;
use std::process::ExitCode;

use pano_testkit::StripRig;

fn main() -> ExitCode {
    let mut args = std::env::args().skip(1);
    let Some(out) = args.next().map(PathBuf::from) else {
        eprintln!(
            "usage: gen-sequence <out-dir> [frames] [spacing] [width] [height] [seed]"
        );
        return ExitCode::from(2);
    };
    let frames: usize = parse_or(args.next(), 3);
    let spacing: usize = parse_or(args.next(), 300);
    let width: usize = parse_or(args.next(), 512);
    let height: usize = parse_or(args.next(), 160);
    let seed: u64 = parse_or(args.next(), 7);

    // A distinct scene per frame keeps the dataset deduplicator from
    // collapsing the sequence to a single panorama.
    let rig = StripRig::matched(spacing, width, height, seed);
    for i in 0..frames {
        let scene = StripRig::matched(spacing, width, height, seed.wrapping_add(i as u64));
        let frame = format!("{i:06}");
        if let Err(err) = scene.write_frame(&out, &frame) {
            eprintln!("error: failed to write frame {frame}: {err}");
            return ExitCode::from(1);
        }
    }

    println!(
        "wrote {frames} frame(s) of {width}x{height} views to {}",
        out.display()
    );
    println!("camera spacing (arc): {spacing}  panorama period: {}", rig.period());
    println!("focal length for the CLI: --f {}", rig.f);
    ExitCode::SUCCESS
}

fn parse_or<T: std::str::FromStr>(arg: Option<String>, default: T) -> T {
    arg.and_then(|s| s.parse().ok()).unwrap_or(default)
}
