//! Solves the constant-potential problem and compares with shooting plus
//! rescaling: `cargo run --release --example ground_state -- [a b p r_max]`.

use kirchhoff::shooting::{kirchhoff_rescaling, solve_scalar_field_shooting};
use kirchhoff::solver::{solve_ground_state, SolverOptions};
use kirchhoff::{Nonlinearity, Potential, ProblemSpec};

fn main() -> kirchhoff::Result<()> {
    let args: Vec<f64> = std::env::args()
        .skip(1)
        .map(|s| s.parse().expect("numeric argument"))
        .collect();
    let (a, b, p, r_max) = match args[..] {
        [a, b, p, r_max] => (a, b, p, r_max),
        _ => (1.0, 0.25, 4.0, 430.0),
    };
    let ps = ProblemSpec::new(
        a,
        b,
        Potential::Constant { alpha: 1.0 },
        Nonlinearity::pure_power(p),
    )?;
    let r = solve_ground_state(&ps, &SolverOptions::uniform(r_max, 2001)?)?;
    let v = solve_scalar_field_shooting(1.0, 1.0, &ps.nonlinearity)?;
    let k = kirchhoff_rescaling(&v, a, b)?;
    println!(
        "status      {:?} after {} iterations",
        r.status, r.iterations
    );
    println!("m (direct)  {:.12e}", r.m);
    println!("m (oracle)  {:.12e}", k.energy);
    println!("rel. gap    {:.3e}", (r.m - k.energy).abs() / k.energy);
    println!("|P(u)|      {:.3e}", r.pohozaev_residual);
    println!(
        "u(0)        {:.8}  (v(0) = {:.8}, t = {:.6})",
        r.u_hat.values()[0],
        v.v0,
        k.t
    );
    Ok(())
}
