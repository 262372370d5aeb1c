//! Runs every named experiment with default settings, writing tables and
//! summaries to a scratch directory.

use wigner_grav::experiments::{
    cmd_diffusion_purities, cmd_negativity, cmd_potentials, cmd_purity_curve, cmd_trajectories,
    CommonArgs, DiffusionArgs, NegativityArgs, PotentialsArgs, PurityCurveArgs, TrajectoryArgs,
};

fn main() -> wigner_grav::Result<()> {
    let dir = std::env::temp_dir().join("wigner-grav-runs");
    std::fs::create_dir_all(&dir)?;
    let common = |name: &str| CommonArgs {
        output: Some(dir.join(format!("{name}.csv"))),
        ..CommonArgs::default()
    };
    let reports = [
        cmd_purity_curve(&PurityCurveArgs {
            common: common("purity"),
            ..Default::default()
        })?,
        cmd_negativity(&NegativityArgs {
            common: common("negativity"),
            ..Default::default()
        })?,
        cmd_diffusion_purities(&DiffusionArgs {
            common: common("diffusion"),
            ..Default::default()
        })?,
        cmd_trajectories(&TrajectoryArgs {
            common: common("trajectories"),
            ..Default::default()
        })?,
        cmd_potentials(&PotentialsArgs {
            common: common("potentials"),
            ..Default::default()
        })?,
    ];
    for r in &reports {
        print!("{}", r.summary());
    }
    println!("outputs in {}", dir.display());
    Ok(())
}
