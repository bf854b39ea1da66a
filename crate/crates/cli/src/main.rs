use anyhow::Result;
use clap::Parser;
use kcut_cli::{run, Args};

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let config = Args::parse().into_config()?;
    let report = run(&config)?;
    println!("vertices        {}", report.n);
    println!("edges           {}", report.num_edges);
    match report.bcut {
        Some(b) => println!("balanced cut    {b:.6} ({})", config.balance),
        None => println!("balanced cut    none (partition has empty clusters)"),
    }
    println!("cluster sizes   {:?}", report.cluster_sizes);
    if let Some(e) = report.clustering_error {
        println!("error           {e:.2}%");
    }
    println!("runtime         {:.1}s", report.runtime_seconds);
    println!("output          {}", config.out_dir.display());
    Ok(())
}
