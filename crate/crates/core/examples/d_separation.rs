//! Bayes-ball d-separation on a small graph with a chain, a fork and a
//! collider.

use locality_lab::infer::d_separated;
use locality_lab::{Dag, VariableId};

fn x(i: usize) -> VariableId {
    VariableId::new(i)
}

fn main() -> locality_lab::Result<()> {
    // X0 -> X1 -> X2, X1 -> X3, X2 -> X4 <- X3
    let dag = Dag::from_edges(5, &[(x(0), x(1)), (x(1), x(2)), (x(1), x(3)), (x(2), x(4)), (x(3), x(4))])?;
    let cases: [(usize, usize, &[usize]); 6] = [
        (0, 2, &[]),
        (0, 2, &[1]),
        (2, 3, &[1]),
        (2, 3, &[1, 4]),
        (0, 4, &[2, 3]),
        (0, 4, &[1]),
    ];
    for (a, b, given) in cases {
        let z: Vec<VariableId> = given.iter().map(|&i| x(i)).collect();
        let names: Vec<String> = z.iter().map(|v| v.to_string()).collect();
        println!("{} _|_ {} | {{{}}}: {}", x(a), x(b), names.join(", "), d_separated(&dag, x(a), x(b), &z));
    }
    Ok(())
}
