//! Electric-double-layer transistor model.
//!
//! The channel/electrolyte stack is discretized as an N-segment transmission
//! line: the channel is a chain of resistors whose local sheet conductance
//! depends on the charge stored in that segment's EDL capacitor, and every
//! segment midpoint connects to the gate through an ionic resistance in
//! series with the capacitor. Per step the resistive network is solved
//! exactly with the capacitor voltages frozen (they enter as voltage
//! sources), then the capacitor voltages advance by explicit Euler. The
//! electronic subsystem is therefore always in quasi-static equilibrium and
//! the only integrated state is the slow ionic charging.

mod waveform;


pub use waveform::{PulseProgram, TriangularWave};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::solve_tridiagonal;
use crate::scalar::{elementary_charge, Real};

/// Material and geometry constants of one device, SI units throughout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
#[serde(bound(deserialize = "T: Deserialize<'de> + Real"))]
pub struct DeviceParams<T> {
    /// Channel length in meters.
    pub channel_length: T,
    /// Channel width in meters.
    pub channel_width: T,
    /// Zero-bias hole sheet density, carriers per m^2.
    pub hole_sheet_density_p0: T,
    /// Hole mobility, m^2/(V s).
    pub hole_mobility: T,
    /// EDL capacitance per area, F/m^2.
    pub edl_capacitance_per_area: T,
    /// Mobile Li+ density in the electrolyte, per m^3.
    pub li_density: T,
    /// Li+ mobility, m^2/(V s).
    pub li_mobility: T,
    /// Electrolyte thickness, meters.
    pub electrolyte_thickness: T,
    /// Number of ladder segments.
    pub segment_count: usize,
    /// Lower clamp on the hole sheet density, per m^2.
    pub hole_sheet_density_floor: T,
    /// Integration timestep in seconds.
    pub timestep: T,
    /// Safety factor for the explicit-Euler stability guard.
    pub stability_factor: T,
}

impl<T: Real> Default for DeviceParams<T> {
    fn default() -> Self {
        Self {
            channel_length: T::of(100e-6),
            channel_width: T::of(100e-6),
            hole_sheet_density_p0: T::of(1e16), // 1e19 cm^-3 over 1 nm
            hole_mobility: T::of(150e-4),       // 150 cm^2/Vs
            edl_capacitance_per_area: T::of(4.0e-2), // 4.0 uF/cm^2
            li_density: T::of(1e28),            // 1e22 cm^-3
            li_mobility: T::of(4e-17),          // 4e-13 cm^2/Vs
            electrolyte_thickness: T::of(100e-9),
            segment_count: 50,
            hole_sheet_density_floor: T::of(1e13), // p0 / 1000
            timestep: T::of(50e-6),
            stability_factor: T::of(0.2),
        }
    }
}

impl<T: Real> DeviceParams<T> {
    pub fn with_channel_length(mut self, meters: T) -> Self {
        self.channel_length = meters;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive: [(&str, T); 10] = [
            ("channel_length", self.channel_length),
            ("channel_width", self.channel_width),
            ("hole_sheet_density_p0", self.hole_sheet_density_p0),
            ("hole_mobility", self.hole_mobility),
            ("edl_capacitance_per_area", self.edl_capacitance_per_area),
            ("li_density", self.li_density),
            ("li_mobility", self.li_mobility),
            ("electrolyte_thickness", self.electrolyte_thickness),
            ("timestep", self.timestep),
            ("stability_factor", self.stability_factor),
        ];
        for (name, v) in positive {
            if !(v > T::zero()) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be strictly positive"
                )));
            }
        }
        if self.segment_count < 2 {
            return Err(Error::InvalidParameter(
                "segment_count must be at least 2".into(),
            ));
        }
        if !(self.hole_sheet_density_floor > T::zero())
            || self.hole_sheet_density_floor >= self.hole_sheet_density_p0
        {
            return Err(Error::InvalidParameter(
                "hole_sheet_density_floor must lie in (0, p0)".into(),
            ));
        }
        Ok(())
    }

    /// Segment pitch along the channel.
    pub fn segment_length(&self) -> T {
        self.channel_length / T::of_usize(self.segment_count)
    }

    /// EDL capacitance of one segment.
    pub fn segment_capacitance(&self) -> T {
        self.edl_capacitance_per_area * self.channel_width * self.segment_length()
    }

    /// Total EDL capacitance of the device.
    pub fn total_edl_capacitance(&self) -> T {
        self.edl_capacitance_per_area * self.channel_width * self.channel_length
    }

    /// Ionic conductivity of the electrolyte, S/m.
    pub fn ionic_conductivity(&self) -> T {
        elementary_charge::<T>() * self.li_density * self.li_mobility
    }

    /// Conductance of one segment's vertical ionic path.
    pub fn segment_ionic_conductance(&self) -> T {
        self.ionic_conductivity() * self.channel_width * self.segment_length()
            / self.electrolyte_thickness
    }

    /// Channel resistance at the zero-bias sheet density.
    pub fn channel_resistance_p0(&self) -> T {
        self.channel_length
            / (self.channel_width
                * elementary_charge::<T>()
                * self.hole_mobility
                * self.hole_sheet_density_p0)
    }
}

/// Currents at the three terminals, positive into the device, plus the
/// decomposition of the drain current into its conduction (source-bound)
/// and EDL-charging (gate-bound) shares.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TerminalCurrents<T> {
    pub i_drain: T,
    pub i_source: T,
    pub i_gate: T,
    /// Conduction current exiting at the source terminal.
    pub x_component: T,
    /// Drain-current share feeding EDL charging through the gate.
    pub y_component: T,
}

/// Result of one quasi-static network solve at frozen capacitor voltages.
#[derive(Debug, Clone)]
pub struct NetworkSolution<T> {
    /// Potential of each segment midpoint node.
    pub node_potential: Vec<T>,
    /// Current flowing from the gate into each segment's EDL branch.
    pub edl_current: Vec<T>,
    /// Chain currents, left to right: source->m0, m0->m1, ..., m(N-1)->drain.
    pub chain_current: Vec<T>,
    pub currents: TerminalCurrents<T>,
}

/// One EDL transistor with its integration state.
#[derive(Debug, Clone)]
pub struct Device<T> {
    params: DeviceParams<T>,
    /// Voltage across each segment's EDL capacitor, gate-side plate minus
    /// channel node.
    cap_voltage: Vec<T>,
    /// Midpoint node potentials from the latest network solve.
    node_potential: Vec<T>,
    sim_time: T,
}

/// Uniformly sampled terminal currents over a whole gate program.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceSeries<T> {
    pub times: Vec<T>,
    pub i_drain: Vec<T>,
    pub i_gate: Vec<T>,
    pub x_component: Vec<T>,
    pub y_component: Vec<T>,
    /// Optional per-sample hole sheet density per segment.
    pub segment_profiles: Option<Vec<Vec<T>>>,
    /// Integral of the gate current over the trace at substep resolution.
    pub gate_charge: T,
    pub sample_period: T,
    pub samples_per_step: usize,
}

impl<T: Real> Device<T> {
    /// Builds a device at the zero-bias equilibrium.
    pub fn new(params: DeviceParams<T>) -> Result<Self> {
        params.validate()?;
        let n = params.segment_count;
        Ok(Self {
            params,
            cap_voltage: vec![T::zero(); n],
            node_potential: vec![T::zero(); n],
            sim_time: T::zero(),
        })
    }

    pub fn params(&self) -> &DeviceParams<T> {
        &self.params
    }

    pub fn cap_voltage(&self) -> &[T] {
        &self.cap_voltage
    }

    pub fn node_potential(&self) -> &[T] {
        &self.node_potential
    }

    pub fn sim_time(&self) -> T {
        self.sim_time
    }

    /// Overrides the capacitor state (used e.g. to probe echo-state decay).
    pub fn set_cap_voltage(&mut self, v: &[T]) -> Result<()> {
        if v.len() != self.params.segment_count {
            return Err(Error::DimensionMismatch {
                expected: self.params.segment_count,
                actual: v.len(),
            });
        }
        self.cap_voltage.copy_from_slice(v);
        Ok(())
    }

    /// Hole sheet density of segment `i` under the current EDL charge.
    pub fn hole_sheet_density(&self, i: usize) -> T {
        let p = &self.params;
        let depleted = p.hole_sheet_density_p0
            - p.edl_capacitance_per_area * self.cap_voltage[i] / elementary_charge::<T>();
        depleted.max(p.hole_sheet_density_floor)
    }

    /// Conductance of one full channel segment.
    fn segment_conductance(&self, i: usize) -> T {
        let p = &self.params;
        p.channel_width * elementary_charge::<T>() * self.hole_mobility_density(i)
            / p.segment_length()
    }

    fn hole_mobility_density(&self, i: usize) -> T {
        self.params.hole_mobility * self.hole_sheet_density(i)
    }

    /// Solves the resistive network at frozen capacitor voltages.
    ///
    /// Unknowns are the N segment-midpoint potentials. Segments couple
    /// through half-segment resistances; each midpoint reaches the gate
    /// through the segment's ionic conductance in series with its EDL
    /// capacitor (a voltage source during the solve). Source is grounded,
    /// drain sits at `v_drain`.
    pub fn solve_network(&self, v_gate: T, v_drain: T) -> Result<NetworkSolution<T>> {
        let n = self.params.segment_count;
        let g_ion = self.params.segment_ionic_conductance();
        let two = T::of(2.0);

        let g_seg: Vec<T> = (0..n).map(|i| self.segment_conductance(i)).collect();
        // Conductance between adjacent midpoints: two half-segments in series.
        let g_mid = |i: usize| -> T {
            two * g_seg[i] * g_seg[i + 1] / (g_seg[i] + g_seg[i + 1])
        };
        let g_source = two * g_seg[0];
        let g_drain = two * g_seg[n - 1];

        let mut diag = vec![T::zero(); n];
        let mut off = vec![T::zero(); n.saturating_sub(1)];
        let mut rhs = vec![T::zero(); n];
        for i in 0..n {
            let left = if i == 0 { g_source } else { g_mid(i - 1) };
            let right = if i == n - 1 { g_drain } else { g_mid(i) };
            diag[i] = left + right + g_ion;
            rhs[i] = g_ion * (v_gate - self.cap_voltage[i]);
            if i < n - 1 {
                off[i] = -g_mid(i);
            }
        }
        rhs[n - 1] += g_drain * v_drain;

        let phi = solve_tridiagonal(&off, &diag, &off, &rhs)?;

        let edl_current: Vec<T> = (0..n)
            .map(|i| g_ion * (v_gate - self.cap_voltage[i] - phi[i]))
            .collect();
        let i_gate = edl_current.iter().copied().sum();
        let i_source = g_source * (T::zero() - phi[0]);
        let i_drain = g_drain * (v_drain - phi[n - 1]);

        let mut chain_current = Vec::with_capacity(n + 1);
        chain_current.push(-i_source);
        for i in 0..n - 1 {
            chain_current.push(g_mid(i) * (phi[i] - phi[i + 1]));
        }
        chain_current.push(g_drain * (phi[n - 1] - v_drain));

        Ok(NetworkSolution {
            node_potential: phi,
            edl_current,
            chain_current,
            currents: TerminalCurrents {
                i_drain,
                i_source,
                i_gate,
                x_component: -i_source,
                y_component: -i_gate,
            },
        })
    }

    /// Largest stable explicit-Euler timestep under the current state.
    ///
    /// The fastest local mode of a segment is its EDL capacitance charging
    /// through the ionic resistance plus the nearby channel resistance.
    pub fn stability_limit(&self) -> T {
        let p = &self.params;
        let c = p.segment_capacitance();
        let r_ion = T::one() / p.segment_ionic_conductance();
        let quarter = T::of(0.25);
        let mut tau_min = T::infinity();
        for i in 0..p.segment_count {
            let r_local = r_ion + quarter / self.segment_conductance(i);
            tau_min = tau_min.min(c * r_local);
        }
        p.stability_factor * tau_min
    }

    /// Advances the state by `dt` under fixed terminal voltages.
    pub fn step(&mut self, v_gate: T, v_drain: T, dt: T) -> Result<TerminalCurrents<T>> {
        if !(dt > T::zero()) {
            return Err(Error::InvalidParameter("dt must be > 0".into()));
        }
        let limit = self.stability_limit();
        if dt > limit {
            return Err(Error::UnstableTimestep {
                dt: dt.to_f64().unwrap_or(f64::NAN),
                limit: limit.to_f64().unwrap_or(f64::NAN),
            });
        }
        let solution = self.solve_network(v_gate, v_drain)?;
        let c = self.params.segment_capacitance();
        for (v, &i_edl) in self.cap_voltage.iter_mut().zip(&solution.edl_current) {
            *v += dt * i_edl / c;
        }
        self.node_potential = solution.node_potential;
        self.sim_time += dt;
        Ok(solution.currents)
    }

    /// Integrates the device through a whole pulse program, emitting
    /// `samples_per_step` uniformly spaced samples per program step.
    pub fn run_trace(
        &mut self,
        program: &PulseProgram<T>,
        v_drain: T,
        samples_per_step: usize,
        record_profiles: bool,
    ) -> Result<TraceSeries<T>> {
        program.validate()?;
        if samples_per_step < 10 {
            return Err(Error::InvalidParameter(
                "samples_per_step must be at least 10".into(),
            ));
        }
        let sample_dt = program.period / T::of_usize(samples_per_step);
        let substeps = (sample_dt / self.params.timestep)
            .ceil()
            .to_f64()
            .unwrap()
            .max(1.0) as usize;
        let dt = sample_dt / T::of_usize(substeps);
        let total_substeps = samples_per_step * substeps;
        // Drive the gate by substep index so phase edges are bit-exact.
        let on_substeps = (program.duty_ratio * T::of_usize(total_substeps))
            .round()
            .to_f64()
            .unwrap() as usize;

        let steps = program.num_steps();
        let count = steps * samples_per_step;
        let mut trace = TraceSeries {
            times: Vec::with_capacity(count),
            i_drain: Vec::with_capacity(count),
            i_gate: Vec::with_capacity(count),
            x_component: Vec::with_capacity(count),
            y_component: Vec::with_capacity(count),
            segment_profiles: record_profiles.then(|| Vec::with_capacity(count)),
            gate_charge: T::zero(),
            sample_period: sample_dt,
            samples_per_step,
        };

        for k in 0..steps {
            let t_base = program.period * T::of_usize(k);
            for s in 0..samples_per_step {
                let mut last = None;
                for j in 0..substeps {
                    let idx = s * substeps + j;
                    let v_gate = if idx < on_substeps {
                        program.step_values[k]
                    } else {
                        program.baseline_voltage
                    };
                    let currents = self.step(v_gate, v_drain, dt)?;
                    trace.gate_charge += dt * currents.i_gate;
                    last = Some(currents);
                }
                let currents = last.expect("at least one substep");
                trace.times.push(t_base + sample_dt * T::of_usize(s + 1));
                trace.i_drain.push(currents.i_drain);
                trace.i_gate.push(currents.i_gate);
                trace.x_component.push(currents.x_component);
                trace.y_component.push(currents.y_component);
                if let Some(profiles) = trace.segment_profiles.as_mut() {
                    profiles.push(
                        (0..self.params.segment_count)
                            .map(|i| self.hole_sheet_density(i))
                            .collect(),
                    );
                }
            }
        }
        Ok(trace)
    }

    /// Relaxes the device to the DC operating point by damped fixed-point
    /// iteration on the capacitor voltages. Converged when every EDL branch
    /// current is below `tol` times the Ohmic current scale of the bias.
    pub fn steady_state(&mut self, v_gate: T, v_drain: T, tol: T) -> Result<usize> {
        if !(tol > T::zero()) {
            return Err(Error::InvalidParameter("tol must be > 0".into()));
        }
        const MAX_ITERS: usize = 1000;
        let damping = T::of(0.7);
        let g_ion = self.params.segment_ionic_conductance();
        // Current scale: the bias (or gate) voltage over the undepleted
        // channel resistance, floored to keep the zero-bias case solvable.
        let v_scale = v_drain
            .abs()
            .max(v_gate.abs())
            .max(T::of(1e-12));
        let i_scale = v_scale / self.params.channel_resistance_p0();

        for iter in 0..MAX_ITERS {
            let solution = self.solve_network(v_gate, v_drain)?;
            let max_edl = solution
                .edl_current
                .iter()
                .fold(T::zero(), |acc, &i| acc.max(i.abs()));
            self.node_potential = solution.node_potential;
            if max_edl <= tol * i_scale {
                return Ok(iter + 1);
            }
            for (v, &i_edl) in self.cap_voltage.iter_mut().zip(&solution.edl_current) {
                *v += damping * i_edl / g_ion;
            }
        }
        Err(Error::NoConvergence {
            iterations: MAX_ITERS,
        })
    }
}

impl<T: Real> TraceSeries<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// CSV export: `t_s,i_drain_A,i_gate_A,x_A,y_A` plus optional per-segment
    /// hole-density columns, nine significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str("t_s,i_drain_A,i_gate_A,x_A,y_A");
        if let Some(profiles) = &self.segment_profiles {
            let n = profiles.first().map_or(0, Vec::len);
            for i in 0..n {
                out.push_str(&format!(",p_seg_{i}"));
            }
        }
        out.push('\n');
        for s in 0..self.len() {
            out.push_str(&format!(
                "{:.8e},{:.8e},{:.8e},{:.8e},{:.8e}",
                self.times[s].to_f64().unwrap(),
                self.i_drain[s].to_f64().unwrap(),
                self.i_gate[s].to_f64().unwrap(),
                self.x_component[s].to_f64().unwrap(),
                self.y_component[s].to_f64().unwrap(),
            ));
            if let Some(profiles) = &self.segment_profiles {
                for v in &profiles[s] {
                    out.push_str(&format!(",{:.8e}", v.to_f64().unwrap()));
                }
            }
            out.push('\n');
        }
        out
    }
}
