use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use nmck::checkpoint::{load_function, load_mesh};
use nmck::harness::{
    run_roundtrip, save_state, verify_function, Field, MeshSpec, RoundtripConfig, FUNCTION_NAME, MESH_NAME,
};
use nmck::{CheckpointReader, Error, Family, LagrangeElement, LoadOptions, Schedule, SimComm};

/// Exit code for a completed run whose verification failed.
const VERIFY_FAILED: u8 = 1;

#[derive(Parser)]
#[command(name = "nmck", version, about = "Save on N simulated ranks, load on M")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a mesh, interpolate a field and save both.
    Save {
        #[arg(long, default_value_t = 1)]
        ranks: usize,
        #[command(flatten)]
        problem: Problem,
        #[arg(long)]
        out: PathBuf,
    },
    /// Load a saved mesh and function and print their layout.
    Load {
        #[arg(long, default_value_t = 1)]
        ranks: usize,
        #[arg(long)]
        file: PathBuf,
        #[command(flatten)]
        load: LoadArgs,
    },
    /// Save on N ranks, load on M, and compare with fresh interpolation.
    Roundtrip {
        #[arg(long, default_value_t = 1)]
        save_ranks: usize,
        #[arg(long, default_value_t = 1)]
        load_ranks: usize,
        #[command(flatten)]
        problem: Problem,
        #[command(flatten)]
        load: LoadArgs,
    },
    /// List the datasets in a checkpoint.
    Inspect { file: PathBuf },
    /// Load a checkpoint and compare it with fresh interpolation of FIELD.
    Verify {
        file: PathBuf,
        #[arg(long)]
        field: Field,
        #[arg(long, default_value_t = 1)]
        ranks: usize,
        #[command(flatten)]
        load: LoadArgs,
    },
}

#[derive(Args)]
struct Problem {
    /// `interval:N`, `unit-square:N` or `unit-cube:N`, with optional `:r` refinement.
    #[arg(long, default_value = "unit-square:8")]
    mesh: MeshSpec,
    #[arg(long, default_value = "P")]
    family: Family,
    #[arg(long, default_value_t = 1)]
    degree: usize,
    /// Polynomial in x, y, z.
    #[arg(long, default_value = "x + y")]
    field: Field,
    /// Overlap layers on the saving ranks.
    #[arg(long, default_value_t = 1)]
    overlap: usize,
    /// Run ranks on OS threads.
    #[arg(long)]
    threads: bool,
}

#[derive(Args)]
struct LoadArgs {
    /// Restore the saved partition; requires the saved rank count.
    #[arg(long)]
    exact_distribution: bool,
    /// Overlap layers on the loading ranks.
    #[arg(long, default_value_t = 1)]
    load_overlap: usize,
}

impl LoadArgs {
    fn options(&self) -> LoadOptions {
        LoadOptions {
            overlap: self.load_overlap,
            exact_distribution: self.exact_distribution,
            ..LoadOptions::default()
        }
    }
}

impl Problem {
    fn config(&self, save_ranks: usize, load_ranks: usize) -> Result<RoundtripConfig, Error> {
        let element = LagrangeElement::new(self.family, self.degree)?;
        let mut cfg = RoundtripConfig::new(self.mesh, element, self.field.clone(), save_ranks, load_ranks);
        cfg.overlap = self.overlap;
        if self.threads {
            cfg.schedule = Schedule::Threaded;
        }
        Ok(cfg)
    }
}

fn list(v: impl IntoIterator<Item = usize>) -> String {
    v.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Save { ranks, problem, out } => {
            let cfg = problem.config(ranks, 1)?;
            let (bytes, mesh, func) = save_state(&cfg)?;
            fs::write(&out, &bytes).map_err(nmck::CheckpointError::from)?;
            println!("file={}", out.display());
            println!("bytes={}", bytes.len());
            println!("ranks={ranks}");
            println!("global_points={}", mesh.dist.numbering.num_global);
            println!("local_dofs={}", list(func.space.sections.iter().map(|s| s.total)));
            Ok(0)
        }
        Command::Load { ranks, file, load } => {
            let comm = SimComm::sequential(ranks);
            let mut r = CheckpointReader::open(&file)?;
            let t = Instant::now();
            let mesh = load_mesh(&mut r, &comm, MESH_NAME, load.options())?;
            let f = load_function(&mut r, &comm, &mesh, FUNCTION_NAME)?;
            println!("ranks={ranks}");
            println!("global_points={}", mesh.dist.numbering.num_global);
            println!("loaded_points={}", list(mesh.dist.plexes.iter().map(|p| p.npoints())));
            println!(
                "owned_points={}",
                list((0..ranks).map(|r| mesh.dist.owned_points(r).len()))
            );
            println!("space={}", f.space.name);
            println!("loaded_dofs={}", list(f.space.sections.iter().map(|s| s.total)));
            println!("time_load_s={:.6}", t.elapsed().as_secs_f64());
            Ok(0)
        }
        Command::Roundtrip {
            save_ranks,
            load_ranks,
            problem,
            load,
        } => {
            let mut cfg = problem.config(save_ranks, load_ranks)?;
            cfg.exact_distribution = load.exact_distribution;
            cfg.load_overlap = load.load_overlap;
            let report = run_roundtrip(&cfg)?;
            print!("{}", report.key_values());
            Ok(if report.passed() { 0 } else { VERIFY_FAILED })
        }
        Command::Inspect { file } => {
            let r = CheckpointReader::open(&file)?;
            for e in r.entries() {
                println!("{}\t{}\t{}\t{}", e.name, e.dtype.name(), e.len(), e.offset);
            }
            Ok(0)
        }
        Command::Verify {
            file,
            field,
            ranks,
            load,
        } => {
            let comm = SimComm::sequential(ranks);
            let mut r = CheckpointReader::open(&file)?;
            let mesh = load_mesh(&mut r, &comm, MESH_NAME, load.options())?;
            let f = load_function(&mut r, &comm, &mesh, FUNCTION_NAME)?;
            let v = verify_function(&comm, &mesh, &f, &field)?;
            println!("compared_dofs={}", v.compared);
            println!("mismatched_dofs={}", v.mismatched);
            println!("max_abs_deviation={:e}", v.max_abs_deviation);
            Ok(if v.mismatched == 0 { 0 } else { VERIFY_FAILED })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

#[cfg(test)]
mod tests {
    use clap::CommandFactory;

    #[test]
    fn arguments_are_consistent() {
        super::Cli::command().debug_assert();
    }
}
