//! Shot-based estimation by Pauli fault injection.
//!
//! The noiseless circuit is simulated once on a stabilizer tableau, giving
//! the affine Z-basis distribution of the ideal state. Faults are tracked
//! as a Pauli frame for 64 shots at a time, one bit lane per shot; the
//! frame's X part at the end flips the ideal sample. Each shot draws from
//! its own stream `(seed, shot)`, so results do not depend on batching or
//! thread count.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};
use rayon::prelude::*;

use super::exact::check_width;
use super::noise::{compile, Program, Step};
use super::pauli::get_bit;
use super::tableau::{AffineSampler, Tableau};
use super::{EstimateMode, ExpvalEstimate, NoiseModel, PauliObservable};
use crate::circuit::{Circuit, Gate};
use crate::device::DeviceModel;
use crate::error::{Error, Result};
use crate::layout::Layout;
use crate::rng;

const LANES: usize = 64;

struct Site {
    step: usize,
    p: f64,
    two: bool,
}

struct Fault {
    step: usize,
    lane: usize,
    code: u8,
}

struct Plan<'a> {
    program: &'a Program,
    ideal: AffineSampler,
    sites: Vec<Site>,
    thin: Option<(Geometric, f64)>,
    global_p: Option<f64>,
}

impl<'a> Plan<'a> {
    fn new(program: &'a Program, noise: &NoiseModel) -> Self {
        let mut tableau = Tableau::zero_state(program.num_qubits);
        for step in &program.steps {
            if let Step::Gate(g) = step {
                tableau.apply(g);
            }
        }
        let sites: Vec<Site> = program
            .sites()
            .map(|(step, s)| match *s {
                Step::Noise { p, two, .. } => Site { step, p, two },
                Step::Gate(_) => unreachable!(),
            })
            .collect();
        let p_max = sites.iter().map(|s| s.p).fold(0.0, f64::max);
        let thin = (p_max > 0.0).then(|| (Geometric::new(p_max).expect("p in (0,1)"), p_max));
        Self {
            program,
            ideal: tableau.z_distribution(),
            sites,
            thin,
            global_p: match *noise {
                NoiseModel::GlobalDepolarizing { p } => Some(p),
                _ => None,
            },
        }
    }

    fn draw_faults(&self, rng: &mut ChaCha8Rng, lane: usize, out: &mut Vec<Fault>) {
        let Some((geo, p_max)) = &self.thin else {
            return;
        };
        // Candidates arrive at rate p_max and are kept with probability
        // p/p_max, which is exact Bernoulli(p) per site.
        let mut idx = 0u64;
        loop {
            idx += geo.sample(rng);
            let Some(site) = self.sites.get(idx as usize) else {
                break;
            };
            if rng.random::<f64>() * p_max < site.p {
                let code = rng.random_range(0..if site.two { 16 } else { 4 });
                if code != 0 {
                    out.push(Fault {
                        step: site.step,
                        lane,
                        code,
                    });
                }
            }
            idx += 1;
        }
    }

    /// Measured bits of shots `first..first + lanes`, one lane word per
    /// qubit, and the mask of active lanes.
    fn run_batch(&self, seed: u64, first: u64, lanes: usize) -> (Vec<u64>, u64) {
        let n = self.program.num_qubits;
        let dim = self.ideal.dimension();
        let mut choice = vec![0u64; dim];
        let mut scrambled = 0u64;
        let mut scramble_bits = vec![0u64; n];
        let mut faults = Vec::new();
        for lane in 0..lanes {
            let mut rng = rng::stream(seed, &[first + lane as u64]);
            if let Some(p) = self.global_p {
                if rng.random::<f64>() < p {
                    scrambled |= 1 << lane;
                    for bits in scramble_bits.iter_mut() {
                        *bits |= (rng.random::<bool>() as u64) << lane;
                    }
                }
            }
            for c in choice.iter_mut() {
                *c |= (rng.random::<bool>() as u64) << lane;
            }
            self.draw_faults(&mut rng, lane, &mut faults);
        }
        faults.sort_by_key(|f| f.step);

        let mut x = vec![0u64; n];
        let mut z = vec![0u64; n];
        let mut next = 0;
        for (i, step) in self.program.steps.iter().enumerate() {
            match step {
                Step::Gate(g) => apply_frame(g, &mut x, &mut z),
                Step::Noise { .. } => {
                    while next < faults.len() && faults[next].step == i {
                        let f = &faults[next];
                        let bit = 1u64 << f.lane;
                        for (k, &q) in step.noise_support().iter().enumerate() {
                            let code = f.code >> (2 * k);
                            if code & 1 == 1 {
                                x[q] ^= bit;
                            }
                            if code & 2 == 2 {
                                z[q] ^= bit;
                            }
                        }
                        next += 1;
                    }
                }
            }
        }

        let active = if lanes == LANES {
            u64::MAX
        } else {
            (1 << lanes) - 1
        };
        let mut outcome = x;
        for (q, o) in outcome.iter_mut().enumerate() {
            if get_bit(self.ideal.offset(), q) {
                *o ^= active;
            }
            for (k, v) in self.ideal.basis().iter().enumerate() {
                if get_bit(v, q) {
                    *o ^= choice[k];
                }
            }
            *o = ((*o & !scrambled) | (scramble_bits[q] & scrambled)) & active;
        }
        (outcome, active)
    }

    /// Apply `f` to every batch in parallel; results come back in shot order.
    fn map_batches<T: Send>(&self, shots: u64, seed: u64, f: impl Fn(Vec<u64>, u64) -> T + Sync) -> Vec<T> {
        (0..shots.div_ceil(LANES as u64))
            .into_par_iter()
            .map(|b| {
                let first = b * LANES as u64;
                let lanes = (shots - first).min(LANES as u64) as usize;
                let (outcome, active) = self.run_batch(seed, first, lanes);
                f(outcome, active)
            })
            .collect()
    }
}

fn apply_frame(g: &Gate, x: &mut [u64], z: &mut [u64]) {
    match *g {
        Gate::H(q) => std::mem::swap(&mut x[q], &mut z[q]),
        Gate::S(q) | Gate::Sdg(q) => z[q] ^= x[q],
        Gate::CX(c, t) => {
            x[t] ^= x[c];
            z[c] ^= z[t];
        }
        Gate::X(_) | Gate::Y(_) | Gate::Z(_) => {}
        ref other => unreachable!("program holds elementary gates only, got {other}"),
    }
}

/// Monte Carlo estimate from `shots` Z-basis measurements of the noisy
/// circuit. The observable must be diagonal in the Z basis.
///
/// A depolarizing site of strength `p` on `d` dimensions applies a uniform
/// Pauli from all `d²` (identity included) with probability `p`, which
/// reproduces the channel used by [`exact_expval`](super::exact_expval).
pub fn sampled_expval(
    circuit: &Circuit,
    layout: &Layout,
    device: &DeviceModel,
    noise: &NoiseModel,
    observable: &PauliObservable,
    shots: u64,
    seed: u64,
) -> Result<ExpvalEstimate> {
    if shots == 0 {
        return Err(Error::InvalidInput("sampled estimation needs shots >= 1".into()));
    }
    check_width(circuit, observable)?;
    if !observable.is_diagonal() {
        return Err(Error::InvalidInput(
            "sampled estimation supports Z-diagonal observables only".into(),
        ));
    }
    let program = compile(circuit, layout, device, noise)?;
    let plan = Plan::new(&program, noise);
    let mut constant = 0.0;
    let mut terms = Vec::new();
    for (c, p) in observable.terms() {
        let c = c * p.sign();
        if p.is_identity() {
            constant += c;
        } else {
            terms.push((c, p.support()));
        }
    }
    let parts = plan.map_batches(shots, seed, |outcome, active| {
        let lanes = active.count_ones() as usize;
        let mut values = vec![constant; lanes];
        for (c, qs) in &terms {
            let parity = qs.iter().fold(0u64, |acc, &q| acc ^ outcome[q]);
            for (lane, v) in values.iter_mut().enumerate() {
                *v += if parity >> lane & 1 == 1 { -c } else { *c };
            }
        }
        values.iter().fold((0.0, 0.0), |(s, ss), v| (s + v, ss + v * v))
    });
    let (sum, sumsq) = parts.iter().fold((0.0, 0.0), |(s, ss), (a, b)| (s + a, ss + b));
    let count = shots as f64;
    let mean = sum / count;
    let stderr = if shots > 1 {
        let var = ((sumsq - sum * mean) / (count - 1.0)).max(0.0);
        (var / count).sqrt()
    } else {
        0.0
    };
    Ok(ExpvalEstimate {
        mean,
        stderr,
        shots,
        mode: EstimateMode::Sampled,
    })
}

/// Fraction of `shots` in which every qubit reads 0.
pub(crate) fn sampled_zero_probability(
    circuit: &Circuit,
    layout: &Layout,
    device: &DeviceModel,
    noise: &NoiseModel,
    shots: u64,
    seed: u64,
) -> Result<f64> {
    if shots == 0 {
        return Err(Error::InvalidInput("sampled estimation needs shots >= 1".into()));
    }
    let program = compile(circuit, layout, device, noise)?;
    let plan = Plan::new(&program, noise);
    let zeros: u64 = plan
        .map_batches(shots, seed, |outcome, active| {
            let any = outcome.iter().fold(0u64, |acc, o| acc | o);
            (active & !any).count_ones() as u64
        })
        .iter()
        .sum();
    Ok(zeros as f64 / shots as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::gen_mirrored_brickwork;
    use crate::sim::{exact_expval, make_observable};

    fn line(n: usize, eps2: f64, eps1: f64) -> DeviceModel {
        DeviceModel::uniform("line", n, (0..n - 1).map(|i| (i, i + 1)).collect(), eps2, eps1).unwrap()
    }

    #[test]
    fn noiseless_brickwork_is_exact_every_shot() {
        let c = gen_mirrored_brickwork(8, 4, 3).unwrap();
        let obs = make_observable(8, 1).unwrap();
        let est = sampled_expval(
            &c,
            &Layout::trivial(8),
            &line(8, 0.0, 0.0),
            &NoiseModel::PerGateDepolarizing,
            &obs,
            500,
            1,
        )
        .unwrap();
        assert_eq!(est.mean, 1.0);
        assert_eq!(est.stderr, 0.0);
    }

    #[test]
    fn seeded_and_schedule_independent() {
        let c = gen_mirrored_brickwork(4, 4, 3).unwrap();
        let obs = make_observable(4, 2).unwrap();
        let dev = line(4, 0.05, 0.01);
        let run = |shots| {
            sampled_expval(
                &c,
                &Layout::trivial(4),
                &dev,
                &NoiseModel::PerGateDepolarizing,
                &obs,
                shots,
                9,
            )
            .unwrap()
        };
        assert_eq!(run(1000), run(1000));
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        assert_eq!(pool.install(|| run(1000)), run(1000));
    }

    #[test]
    fn agrees_with_exact() {
        let c = gen_mirrored_brickwork(4, 6, 5).unwrap();
        let obs = make_observable(4, 1).unwrap();
        let dev = line(4, 0.04, 0.01);
        let layout = Layout::trivial(4);
        let exact = exact_expval(&c, &layout, &dev, &NoiseModel::PerGateDepolarizing, &obs).unwrap();
        let est = sampled_expval(
            &c,
            &layout,
            &dev,
            &NoiseModel::PerGateDepolarizing,
            &obs,
            20_000,
            2,
        )
        .unwrap();
        assert!(
            (est.mean - exact.mean).abs() < 4.0 * est.stderr,
            "{est:?} vs {exact:?}"
        );
    }

    #[test]
    fn rejects_bad_requests() {
        let c = Circuit::new(2);
        let dev = line(2, 0.0, 0.0);
        let obs = make_observable(2, 1).unwrap();
        let l = Layout::trivial(2);
        assert!(sampled_expval(&c, &l, &dev, &NoiseModel::Ideal, &obs, 0, 0).is_err());
        let xx = PauliObservable::new(2, vec![(1.0, crate::sim::PauliString::parse("XX").unwrap())]).unwrap();
        assert!(sampled_expval(&c, &l, &dev, &NoiseModel::Ideal, &xx, 10, 0).is_err());
    }
}
