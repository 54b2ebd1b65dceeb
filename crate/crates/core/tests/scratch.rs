use cbtomo_core::*;
use ndarray::Array2;
use num_complex::Complex64;

#[test]
fn debug_scratch() {
    // 1. numeric GS probabilities at EJ/EC = 50 and 10
    for ratio in [50.0, 10.0] {
        let model = TargetModel::new(1.0, ratio, 0.0).unwrap();
        let gs = ground_state(&model).unwrap();
        let p = charge_probabilities(&gs);
        let b = gs.basis();
        let beta = model.beta();
        println!(
            "ratio {ratio}: p0={:.6} p1={:.6} p2={:.6} p3={:.6e} p4={:.6e} p1/p0={:.6} gauss_p0={:.6}",
            p[b.index_of(0)],
            p[b.index_of(1)],
            p[b.index_of(2)],
            p[b.index_of(3)],
            p[b.index_of(4)],
            p[b.index_of(1)] / p[b.index_of(0)],
            1.0 / (beta * std::f64::consts::PI.sqrt())
        );
        let ana = analytic_state(0, &model, &b).unwrap();
        let overlap: Complex64 = gs
            .coefficients()
            .iter()
            .zip(ana.coefficients().iter())
            .map(|(a, c)| a.conj() * c)
            .sum();
        println!("  analytic overlap = {:.8}", overlap.norm());
    }

    // 2. projection residual on a physical matrix
    let basis = ChargeBasis::new(1);
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let raw = ndarray::array![
        [c(0.5, 0.0), c(0.1, 0.05), c(0.0, 0.0)],
        [c(0.1, -0.05), c(0.3, 0.0), c(0.0, 0.0)],
        [c(0.0, 0.0), c(0.0, 0.0), c(0.2, 0.0)]
    ];
    let rho = project_physical(&raw, &basis).unwrap();
    let mut worst = 0.0f64;
    for (a, b2) in rho.data().iter().zip(raw.iter()) {
        worst = worst.max((a - b2).norm());
    }
    println!("projection residual on physical input: {worst:.3e}");
    println!("projected = {:?}", rho.data());

    // 3. per-level contributions to the numeric T elements (EJ 50 -> 10)
    let model = TargetModel::new(1.0, 50.0, 0.0).unwrap();
    let internal = ChargeBasis::internal_for(&model);
    let dim = internal.dim();
    let sys0 = solve_model(&model, &internal, dim).unwrap();
    let model10 = model.at_ej(10.0).unwrap();
    let sysi = solve_model(&model10, &internal, dim).unwrap();
    for p in 0..12 {
        let amp_i = sysi.states[p].coefficient(1).norm();
        let amp_0 = sys0.states[p].coefficient(4).norm();
        println!(
            "level {p}: eps0={:.3} epsi={:.3} |psi_p^i(1)|={:.3e} |psi_p^0(4)|={:.3e}",
            sys0.values[p], sysi.values[p], amp_i, amp_0
        );
    }

    // 4. residual-EJ scan amplitudes with fig6-style parameters
    let ec = 0.25; // GHz
    let model = TargetModel::new(ec, 50.0 * ec, 0.0).unwrap();
    let prepared = ground_state(&model).unwrap();
    let probe = ProbeSpec::new(3.0 / ec, 0.1 / ec).unwrap(); // Delta_p = 3 GHz, g = 0.1 GHz in EC units
    let rep = ChargeBasis::default_for(&model);
    let grid = TimeGrid::protocol_default(&probe, &rep).unwrap();
    println!("grid samples = {}, duration = {:.3}", grid.len(), grid.duration());
    let ratios = [0.0, 0.05, 0.1, 0.5, 1.0, 2.0];
    let table = residual_ej_scan(&prepared, 1.0, 0.0, &probe, &ratios, &grid, &rep).unwrap();
    for row in &table.rows {
        let a: Vec<String> = (0..=4)
            .map(|n| format!("A{}={:.6e}", n, row.peaks.amplitude(n).unwrap()))
            .collect();
        println!("EJ/EC={:<5} {}", row.ej_over_ec, a.join(" "));
    }

    // 5. flux qubit gap vs ng and Np
    let spec = CircuitSpec::reference();
    for np in [3u32, 4, 5] {
        let opts = circuit::FluxQubitOptions {
            np,
            k: 2,
            ..Default::default()
        };
        let mut row = String::new();
        for ng in [0.0, 0.25, 0.45, 0.5] {
            let mut s = spec;
            s.ng_p = ng;
            let sub = circuit::flux_qubit_eigensystem(&s, &opts).unwrap();
            row.push_str(&format!("D({ng})={:.6} ", sub.delta_p));
        }
        println!("Np={np}: {row}");
    }

    // 6. transverse coupling spike study at Np=3
    let mut spec = CircuitSpec::reference();
    spec.alpha_r = 0.45;
    let opts = circuit::FluxQubitOptions {
        np: 3,
        k: 2,
        ..Default::default()
    };
    for ng in [0.25, 0.35, 0.45, 0.47, 0.49] {
        let mut s = spec;
        s.ng_p = ng;
        match circuit::coupling_strengths(&s, &opts) {
            Ok(c) => println!(
                "da=0.05 ng={ng}: delta_p={:.4} g_perp={:.5e} g_par={:.5e}",
                c.delta_p,
                c.g_perp_pc.norm(),
                c.g_par_pc.re
            ),
            Err(e) => println!("da=0.05 ng={ng}: {e}"),
        }
    }

    // 7. lanczos vs dense on the random matrix from the failing test
    use cbtomo_core::linalg::{lanczos_lowest, LanczosConfig, SparseHermitian};
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(7);
    let dimr = 120;
    let mut trip = Vec::new();
    for i in 0..dimr {
        trip.push((i, i, Complex64::new(rng.random::<f64>() * 4.0, 0.0)));
        if i + 1 < dimr {
            let v = Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
            trip.push((i, i + 1, v));
            trip.push((i + 1, i, v.conj()));
        }
        if i + 7 < dimr {
            let v = Complex64::new(rng.random::<f64>() - 0.5, 0.3);
            trip.push((i, i + 7, v));
            trip.push((i + 7, i, v.conj()));
        }
    }
    let m = SparseHermitian::from_triplets(dimr, &trip);
    let dense = m.to_dense();
    let (dv, dvecs) = cbtomo_core::linalg::eigh_complex_lowest(&dense, 6).unwrap();
    let cfg = LanczosConfig {
        k: 6,
        ..Default::default()
    };
    let (lv, lvecs) = lanczos_lowest(&m, &cfg).unwrap();
    for q in 0..6 {
        let overlap: Complex64 = dvecs[q]
            .iter()
            .zip(lvecs[q].iter())
            .map(|(a, b)| a.conj() * b)
            .sum();
        // residuals
        let mut hv = ndarray::Array1::<Complex64>::zeros(dimr);
        let mut hd = ndarray::Array1::<Complex64>::zeros(dimr);
        use cbtomo_core::linalg::HermitianOp;
        m.apply(lvecs[q].view(), &mut hv);
        m.apply(dvecs[q].view(), &mut hd);
        let res_l: f64 = hv
            .iter()
            .zip(lvecs[q].iter())
            .map(|(h, v)| (h - lv[q] * v).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let res_d: f64 = hd
            .iter()
            .zip(dvecs[q].iter())
            .map(|(h, v)| (h - dv[q] * v).norm_sqr())
            .sum::<f64>()
            .sqrt();
        println!(
            "q={q}: dense={:.12} lanczos={:.12} overlap={:.12} res_l={:.2e} res_d={:.2e}",
            dv[q], lv[q], overlap.norm(), res_l, res_d
        );
    }

    // 8. analytic map with physicists' convention: check T elements vs numeric
    let t = adiabatic_transform(&model_at(50.0), 10.0, &[], &ChargeBasis::internal_for(&model_at(50.0)));
    match t {
        Ok(t) => {
            println!("unitarity defect = {:.3e}", t.unitarity_defect());
            let mut tail = 0.0f64;
            for n in -2..=2 {
                for j in -19..=19i32 {
                    if j.abs() > 5 {
                        tail = tail.max(t.element(n, j).norm());
                    }
                }
            }
            println!("T visible-row tail (|j|>5): {tail:.3e}");
        }
        Err(e) => println!("transform error: {e}"),
    }
}

fn model_at(ej: f64) -> TargetModel {
    TargetModel::new(1.0, ej, 0.0).unwrap()
}
