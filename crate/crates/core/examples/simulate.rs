//! Multiplies two random 96x96 matrices on a simulated 8x8 array and checks
//! the result against the reference kernel.

use quadgemm::rgemm::e_l1;
use quadgemm::systolic::{reference_gemm, simulate_gemm};
use quadgemm::{ArrayConfig, MaddMode, Matrix};

fn main() {
    let n = 96;
    let a = Matrix::random(n, n, n, 1).unwrap();
    let b = Matrix::random(n, n, n, 2).unwrap();
    let cfg = ArrayConfig::new(8, 8, 32, 201.28).unwrap();
    let report = simulate_gemm(&cfg, &a, &b).unwrap();
    let reference = reference_gemm(&a, &b, MaddMode::TwoRoundings).unwrap();
    let fused = reference_gemm(&a, &b, MaddMode::Fused).unwrap();
    println!("cycles        {}", report.cycles);
    println!("dram bytes    {}", report.dram_bytes);
    println!("model GFlops  {:.3}", report.gflops_model);
    println!("bit-identical {}", report.c_prime.bits_eq(&reference));
    println!("E_L1 fused vs two roundings {:e}", e_l1(&fused, &reference).unwrap().to_f64());
}
