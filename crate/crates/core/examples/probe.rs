// probe: IPM iteration counts inside one see-saw sweep at d=6
use chsh_core::geometry::{Behaviour, Space};
use chsh_core::npa::{max_lambda, NpaLevel};
use chsh_core::sampling::sample_facet_directions;
use chsh_core::sdp::{self, AffineVec, Block, SdpOptions, SdpProblem};
use chsh_core::seesaw::*;
use rand::SeedableRng;
use std::time::Instant;

fn main() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
    let dirs = sample_facet_directions(1, &mut rng);
    let u = Behaviour::new_unchecked(Space::Full8, dirs[0].clone());
    let lam = max_lambda(&u, NpaLevel::OnePlusAB).unwrap();
    let target = u.scaled(lam);
    let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(9);
    let alice = [random_observable(6, &mut r), random_observable(6, &mut r)];
    let bob = [random_observable(6, &mut r), random_observable(6, &mut r)];

    // rebuild the state-dual problem exactly as optimize_state does
    let p = target.coords();
    let id = chsh_core::linalg::Mat::identity(6);
    let mut products = Vec::new();
    products.push(alice[0].kron(&id));
    products.push(alice[1].kron(&id));
    products.push(id.kron(&bob[0]));
    products.push(id.kron(&bob[1]));
    for a in &alice { for b in &bob { products.push(a.kron(b)); } }
    let (s_var, t_var, m) = (8usize, 9usize, 10usize);
    let mut objective = vec![0.0; m];
    objective[..8].copy_from_slice(p);
    objective[s_var] = -1.0;
    let mut problem = SdpProblem::new(objective);
    let mut op_block = Block::new(36, m);
    for (k, g) in products.iter().enumerate() {
        for i in 0..36 { for j in i..36 { op_block.add_coeff(k, i, j, g[(i, j)]); } }
    }
    for i in 0..36 { op_block.add_coeff(s_var, i, i, -1.0); }
    problem.add_block(op_block);
    let mut z_res = AffineVec::zeros(8);
    for k in 0..8 { z_res.add_term(k, k, 1.0); }
    problem.add_block(sdp::norm_epigraph_block(&z_res, t_var, m));
    let mut t_row = vec![0.0; m];
    t_row[t_var] = 1.0;
    problem.add_equality(&t_row, 1.0);

    let t0 = Instant::now();
    let sol = sdp::solve(&problem, SdpOptions::default()).unwrap();
    println!("cold solve: {:?} iters {} gap {:.2e} in {:.1} ms",
        sol.status, sol.iterations, sol.duality_gap, t0.elapsed().as_secs_f64()*1e3);
}
