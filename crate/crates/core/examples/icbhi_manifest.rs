//! Builds a manifest from the public respiratory sound database layout: a
//! directory of `<patient>_<rec>_<location>_<mode>_<device>.wav` files and a
//! two-column `patient,diagnosis` file (comma or tab separated, no header).
//!
//! cargo run --example icbhi_manifest -- <audio_dir> <patient_diagnosis.csv> [manifest.csv]

use std::collections::HashMap;
use std::io::Write;
use std::path::Path;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let (Some(audio_dir), Some(diagnosis)) = (args.first(), args.get(1)) else {
        eprintln!("usage: icbhi_manifest <audio_dir> <patient_diagnosis.csv> [manifest.csv]");
        std::process::exit(2);
    };
    let out = args
        .get(2)
        .cloned()
        .unwrap_or_else(|| "manifest.csv".into());

    let text = std::fs::read_to_string(diagnosis)?;
    let labels: HashMap<String, String> = text
        .lines()
        .filter_map(|l| {
            let mut f = l.split([',', '\t']).map(str::trim);
            Some((f.next()?.to_string(), f.next()?.to_string()))
        })
        .filter(|(p, d)| !p.is_empty() && !d.is_empty())
        .collect();

    let mut wavs: Vec<_> = std::fs::read_dir(audio_dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("wav")))
        .collect();
    wavs.sort();

    let out_dir = Path::new(&out)
        .parent()
        .filter(|p| !p.as_os_str().is_empty());
    let base = std::fs::canonicalize(out_dir.unwrap_or(Path::new(".")))?;
    let mut w = std::io::BufWriter::new(std::fs::File::create(&out)?);
    writeln!(w, "wav_path,patient_id,label")?;
    let (mut written, mut unlabeled) = (0, 0);
    for wav in wavs {
        let stem = wav
            .file_stem()
            .unwrap_or_default()
            .to_string_lossy()
            .into_owned();
        let patient = stem.split('_').next().unwrap_or_default();
        let Some(label) = labels.get(patient) else {
            unlabeled += 1;
            continue;
        };
        let abs = std::fs::canonicalize(&wav)?;
        let rel = abs.strip_prefix(&base).unwrap_or(&abs);
        writeln!(w, "{},{patient},{label}", rel.display())?;
        written += 1;
    }
    w.flush()?;
    println!("{written} recordings -> {out} ({unlabeled} without a diagnosis)");
    Ok(())
}
