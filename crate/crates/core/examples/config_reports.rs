//! Read a flat config file, run a seeded experiment and write its JSON and
//! CSV reports next to each other.

use nonlocal_lab::geometry::KeyValueConfig;
use nonlocal_lab::harnack::{disconnected_harnack_experiment, DataFamily};
use nonlocal_lab::report::{harnack_csv, to_json};
use nonlocal_lab::Kernel;

const CONFIG: &str = "
# symmetric geometry
n = 1
x1 = -2
x2 = 2
r = 1
R = 16
N = 64
s = 0.3
";

fn main() -> nonlocal_lab::Result<()> {
    let file = KeyValueConfig::parse(CONFIG)?;
    let (config, cells) = file.disconnected_config()?;
    let s = file.f64("s")?.unwrap_or(0.5);
    let exp = disconnected_harnack_experiment(
        &Kernel::fractional(1, s)?,
        &config,
        &DataFamily::RandomNonneg { samples: 5 },
        11,
        cells.unwrap_or(64),
    )?;
    let dir = std::env::temp_dir().join("nonlocal-lab-example");
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join("report.json"), to_json(&exp)?)?;
    std::fs::write(dir.join("report.csv"), harnack_csv(&exp.reports))?;
    print!("{}", harnack_csv(&exp.reports));
    println!("wrote {}", dir.display());
    Ok(())
}
