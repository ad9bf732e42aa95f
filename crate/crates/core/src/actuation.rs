//! Binary thruster modulation and reaction-wheel saturation.

use crate::model::{PlatformParams, THRUSTER_COUNT};
use crate::scalar::Real;

/// Per-thruster first-order sigma-delta accumulators [N s].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModulatorState<T> {
    pub accumulators: [T; THRUSTER_COUNT],
    pub tick_count: u64,
}

impl<T: Real> Default for ModulatorState<T> {
    fn default() -> Self {
        Self {
            accumulators: [T::zero(); THRUSTER_COUNT],
            tick_count: 0,
        }
    }
}

impl<T: Real> ModulatorState<T> {
    /// Advances one control tick, returning the valve forces (each `0` or
    /// `thrust_max`).
    ///
    /// Each accumulator integrates the commanded impulse and fires a full
    /// pulse once it holds at least half a pulse, which keeps it inside
    /// `[-thrust_max * dt / 2, thrust_max * dt / 2)` for commands in
    /// `[0, thrust_max]`.
    pub fn step(
        &mut self,
        command: &[T; THRUSTER_COUNT],
        thrust_max: T,
        dt: T,
    ) -> [T; THRUSTER_COUNT] {
        let pulse = thrust_max * dt;
        let threshold = pulse / T::lit(2.0);
        let mut out = [T::zero(); THRUSTER_COUNT];
        for ((acc, &u), fire) in self
            .accumulators
            .iter_mut()
            .zip(command)
            .zip(out.iter_mut())
        {
            let u = u.max(T::zero()).min(thrust_max);
            *acc += u * dt;
            if *acc >= threshold {
                *fire = thrust_max;
                *acc -= pulse;
            }
        }
        self.tick_count += 1;
        out
    }
}

/// Functional form of [`ModulatorState::step`].
pub fn modulate_step<T: Real>(
    ms: &ModulatorState<T>,
    command: &[T; THRUSTER_COUNT],
    thrust_max: T,
    dt: T,
) -> ([T; THRUSTER_COUNT], ModulatorState<T>) {
    let mut next = *ms;
    let out = next.step(command, thrust_max, dt);
    (out, next)
}

/// Clamps the commanded wheel torque to the motor limit and cuts it when the
/// wheel is at its speed limit and the torque would spin it further out.
pub fn saturate_rw<T: Real>(tau_cmd: T, omega_rw: T, p: &PlatformParams<T>) -> T {
    let tau = tau_cmd.max(-p.rw_torque_max).min(p.rw_torque_max);
    let at_limit = omega_rw.abs() >= p.rw_speed_max;
    let outward = tau * omega_rw > T::zero();
    if at_limit && outward {
        T::zero()
    } else {
        tau
    }
}

/// True when [`saturate_rw`] changed the command because of the speed limit.
pub fn rw_speed_saturated<T: Real>(tau_cmd: T, omega_rw: T, p: &PlatformParams<T>) -> bool {
    omega_rw.abs() >= p.rw_speed_max && tau_cmd * omega_rw > T::zero()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const F: f64 = 10.0;
    const DT: f64 = 0.1;

    fn run(u: f64, ticks: usize) -> Vec<f64> {
        let mut ms = ModulatorState::<f64>::default();
        (0..ticks).map(|_| ms.step(&[u; 8], F, DT)[0]).collect()
    }

    #[test]
    fn zero_command_never_fires() {
        let mut ms = ModulatorState::<f64>::default();
        for _ in 0..100 {
            assert_eq!(ms.step(&[0.0; 8], F, DT), [0.0; 8]);
        }
        assert_eq!(ms.accumulators, [0.0; 8]);
        assert_eq!(ms.tick_count, 100);
    }

    #[test]
    fn full_command_fires_every_tick() {
        assert!(run(F, 50).iter().all(|&f| f == F));
    }

    #[test]
    fn half_command_alternates() {
        let out = run(5.0, 10);
        assert_eq!(out, vec![F, 0.0, F, 0.0, F, 0.0, F, 0.0, F, 0.0]);
        assert_eq!(out.iter().sum::<f64>() / 10.0, 5.0);
    }

    #[test]
    fn functional_form_matches() {
        let ms = ModulatorState::<f64>::default();
        let (out, next) = modulate_step(&ms, &[7.0; 8], F, DT);
        assert_eq!(out, [F; 8]);
        assert_eq!(next.tick_count, 1);
        assert_eq!(ms.tick_count, 0);
    }

    #[test]
    fn wheel_saturation_rules() {
        let p = PlatformParams::<f64>::default();
        assert_eq!(saturate_rw(0.2, 0.0, &p), 0.2);
        assert_eq!(saturate_rw(2.0, 0.0, &p), 0.5);
        assert_eq!(saturate_rw(-2.0, 0.0, &p), -0.5);
        assert_eq!(saturate_rw(0.2, p.rw_speed_max, &p), 0.0);
        assert_eq!(saturate_rw(-0.2, p.rw_speed_max, &p), -0.2);
        assert_eq!(saturate_rw(-3.0, p.rw_speed_max, &p), -0.5);
        assert_eq!(saturate_rw(-0.2, -p.rw_speed_max, &p), 0.0);
        assert!(rw_speed_saturated(0.2, p.rw_speed_max, &p));
        assert!(!rw_speed_saturated(-0.2, p.rw_speed_max, &p));
    }

    #[test]
    fn duty_is_monotone_in_command() {
        let mut last = 0;
        for u in 0..=20 {
            let fires = run(u as f64 * 0.5, 1000)
                .iter()
                .filter(|&&f| f > 0.0)
                .count();
            assert!(fires >= last);
            last = fires;
        }
    }

    #[test]
    fn f32_modulator() {
        let mut ms = ModulatorState::<f32>::default();
        let fires: f32 = (0..100).map(|_| ms.step(&[2.5; 8], 10.0, 0.1)[3]).sum();
        assert!((fires / 100.0 - 2.5).abs() <= 0.1);
    }

    proptest! {
        #[test]
        fn accumulators_stay_bounded(cmds in prop::collection::vec(prop::array::uniform8(0.0f64..=F), 1..300)) {
            let mut ms = ModulatorState::<f64>::default();
            for c in &cmds {
                ms.step(c, F, DT);
                for a in ms.accumulators {
                    prop_assert!((-F * DT / 2.0 - 1e-12..F * DT / 2.0 + 1e-12).contains(&a));
                }
            }
        }

        #[test]
        fn window_average_tracks_command(cmds in prop::collection::vec(0.0f64..=F, 1..400)) {
            let mut ms = ModulatorState::<f64>::default();
            let w = cmds.len() as f64;
            let mut fired = 0.0;
            for &c in &cmds {
                fired += ms.step(&[c; 8], F, DT)[0];
            }
            let commanded: f64 = cmds.iter().sum();
            prop_assert!(((fired - commanded) / w).abs() <= F / w + 1e-12);
        }

        #[test]
        fn saturated_torque_within_limit(tau in -10.0f64..10.0, omega in -400.0f64..400.0) {
            let p = PlatformParams::<f64>::default();
            prop_assert!(saturate_rw(tau, omega, &p).abs() <= p.rw_torque_max);
        }
    }
}
