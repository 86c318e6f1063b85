//! The cyclic-shift, modular-addition and cloner unitaries.
//!
//! Every circuit here is a permutation of computational basis states, built
//! from a small gate list so the same description can be compiled to a
//! [`UnitaryOperator`] and exported as a text netlist.

use std::fmt::Write as _;

use crate::ctc::{DctcInteraction, DEFAULT_DENSE_CAP};
use crate::error::{Error, Result};
use crate::qmath::{DensityOperator, SubsystemLayout, UnitaryOperator};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Gate {
    /// Moves the content of unit `i` to unit `i+1` and the last unit to the
    /// first. A unit is one or more slots moved together.
    CyclicShift { units: Vec<Vec<usize>> },
    /// `|x⟩|y⟩ → |x⟩|(x+y) mod d⟩`.
    ModAdd { control: usize, target: usize },
}

impl Gate {
    fn apply(&self, digits: &mut [usize], dims: &[usize]) {
        match self {
            Gate::CyclicShift { units } => {
                let old: Vec<Vec<usize>> = units
                    .iter()
                    .map(|u| u.iter().map(|&s| digits[s]).collect())
                    .collect();
                let k = units.len();
                for (i, unit) in units.iter().enumerate() {
                    let src = &old[(i + k - 1) % k];
                    for (slot, &v) in unit.iter().zip(src) {
                        digits[*slot] = v;
                    }
                }
            }
            Gate::ModAdd { control, target } => {
                digits[*target] = (digits[*control] + digits[*target]) % dims[*target];
            }
        }
    }
}

/// A gate list over a slot layout.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Circuit {
    layout: SubsystemLayout,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(layout: SubsystemLayout) -> Self {
        Self {
            layout,
            gates: Vec::new(),
        }
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn cyclic_shift<S: AsRef<str>>(&mut self, units: &[Vec<S>]) -> Result<&mut Self> {
        if units.len() < 2 {
            return Err(Error::InvalidArgument("cyclic shift needs at least two units".into()));
        }
        let units = units
            .iter()
            .map(|u| u.iter().map(|l| self.layout.index_of(l.as_ref())).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let signature = |u: &Vec<usize>| u.iter().map(|&s| self.layout.dims()[s]).collect::<Vec<_>>();
        let first = signature(&units[0]);
        if units.iter().any(|u| signature(u) != first) {
            return Err(Error::InvalidArgument("shifted units must have matching dimensions".into()));
        }
        self.gates.push(Gate::CyclicShift { units });
        Ok(self)
    }

    pub fn mod_add(&mut self, control: &str, target: &str) -> Result<&mut Self> {
        let control = self.layout.index_of(control)?;
        let target = self.layout.index_of(target)?;
        if control == target || self.layout.dims()[control] != self.layout.dims()[target] {
            return Err(Error::InvalidArgument("modular addition needs two distinct slots of equal dimension".into()));
        }
        self.gates.push(Gate::ModAdd { control, target });
        Ok(self)
    }

    /// Applies the gates in order to a basis state given as digits.
    pub fn apply_digits(&self, digits: &mut [usize]) {
        for g in &self.gates {
            g.apply(digits, self.layout.dims());
        }
    }

    pub fn compile(&self, dense_cap: usize) -> Result<UnitaryOperator> {
        let dim = checked_dim(self.layout.dims())?;
        if dim > dense_cap {
            return Err(Error::DenseCapExceeded {
                dimension: dim,
                cap: dense_cap,
            });
        }
        UnitaryOperator::from_basis_map(self.layout.clone(), |x| {
            let mut d = x.to_vec();
            self.apply_digits(&mut d);
            d
        })
    }

    /// Text netlist: one `slots` line, then one line per gate.
    pub fn netlist(&self) -> String {
        let labels = self.layout.labels();
        let mut s = String::from("slots");
        for (l, d) in labels.iter().zip(self.layout.dims()) {
            let _ = write!(s, " {l}:{d}");
        }
        s.push('\n');
        for g in &self.gates {
            match g {
                Gate::CyclicShift { units } => {
                    s.push_str("cyclic_shift");
                    for u in units {
                        let names: Vec<&str> = u.iter().map(|&k| labels[k].as_str()).collect();
                        let _ = write!(s, " [{}]", names.join(" "));
                    }
                    s.push('\n');
                }
                Gate::ModAdd { control, target } => {
                    let _ = writeln!(s, "mod_add {} {}", labels[*control], labels[*target]);
                }
            }
        }
        s
    }
}

fn checked_dim(dims: &[usize]) -> Result<usize> {
    dims.iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d))
        .ok_or(Error::DenseCapExceeded {
            dimension: usize::MAX,
            cap: 0,
        })
}

/// Cyclic shift by one to the right over `k` slots of dimension `d`:
/// `|x₁⟩…|x_k⟩ → |x_k⟩|x₁⟩…|x_{k−1}⟩`. Slots are labeled `x1 … xk`.
pub fn cyclic_shift_unitary(d: usize, k: usize) -> Result<UnitaryOperator> {
    if k < 2 || d < 1 {
        return Err(Error::InvalidArgument(format!("cyclic shift needs k ≥ 2 slots (got {k})")));
    }
    let layout = SubsystemLayout::numbered("x", k, d)?;
    let mut c = Circuit::new(layout.clone());
    let units: Vec<Vec<&str>> = layout.labels().iter().map(|l| vec![l.as_str()]).collect();
    c.cyclic_shift(&units)?;
    c.compile(DEFAULT_DENSE_CAP)
}

/// `|x⟩|y⟩ → |x⟩|(x+y) mod d⟩` on slots `control`, `target`; CNOT for `d = 2`.
pub fn modular_add_gate(d: usize) -> Result<UnitaryOperator> {
    if d < 2 {
        return Err(Error::InvalidArgument(format!("dimension {d} < 2")));
    }
    let layout = SubsystemLayout::new([("control", d), ("target", d)])?;
    let mut c = Circuit::new(layout);
    c.mod_add("control", "target")?;
    c.compile(usize::MAX)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClonerVariant {
    /// The measured state `ω` enters on slot `S` and is shifted with `C₁…C_N`.
    Measured,
    /// The dilated measurement output enters as `(E, B)` and the pairs
    /// `(E_i, B_i)` are shifted as units; readout copies `B_i`.
    Coherent { env_dim: usize },
}

/// Shape of the cloner interaction. Readout is in the computational basis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ClonerSpec {
    /// Dimension of the slots carrying `ω` (the pointer dimension).
    pub d: usize,
    pub n_ctc: usize,
    pub variant: ClonerVariant,
    pub dense_cap: usize,
}

impl ClonerSpec {
    pub fn measured(d: usize, n_ctc: usize) -> Self {
        Self {
            d,
            n_ctc,
            variant: ClonerVariant::Measured,
            dense_cap: DEFAULT_DENSE_CAP,
        }
    }

    pub fn coherent(env_dim: usize, d: usize, n_ctc: usize) -> Self {
        Self {
            d,
            n_ctc,
            variant: ClonerVariant::Coherent { env_dim },
            dense_cap: DEFAULT_DENSE_CAP,
        }
    }

    pub fn with_dense_cap(mut self, cap: usize) -> Self {
        self.dense_cap = cap;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.d < 2 || self.n_ctc < 1 {
            return Err(Error::InvalidArgument(format!(
                "cloner needs d ≥ 2 and N ≥ 1 (got d={}, N={})",
                self.d, self.n_ctc
            )));
        }
        if let ClonerVariant::Coherent { env_dim } = self.variant {
            if env_dim < 1 {
                return Err(Error::InvalidArgument("environment dimension must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn ancilla_labels(&self) -> Vec<String> {
        (1..=self.n_ctc).map(|i| format!("A{i}")).collect()
    }

    /// Labels of the slots that enter the interaction as the input state.
    pub fn input_labels(&self) -> Vec<String> {
        match self.variant {
            ClonerVariant::Measured => vec!["S".into()],
            ClonerVariant::Coherent { .. } => vec!["E".into(), "B".into()],
        }
    }

    /// Total dimension `d_S · d_C` of the interaction.
    pub fn total_dim(&self) -> Result<usize> {
        self.validate()?;
        checked_dim(self.layout()?.dims())
    }

    fn layout(&self) -> Result<SubsystemLayout> {
        let (d, n) = (self.d, self.n_ctc);
        let mut slots: Vec<(String, usize)> = Vec::new();
        match self.variant {
            ClonerVariant::Measured => {
                slots.push(("S".into(), d));
                slots.extend((1..=n).map(|i| (format!("A{i}"), d)));
                slots.extend((1..=n).map(|i| (format!("C{i}"), d)));
            }
            ClonerVariant::Coherent { env_dim } => {
                slots.push(("E".into(), env_dim));
                slots.push(("B".into(), d));
                slots.extend((1..=n).map(|i| (format!("A{i}"), d)));
                for i in 1..=n {
                    slots.push((format!("E{i}"), env_dim));
                    slots.push((format!("B{i}"), d));
                }
            }
        }
        SubsystemLayout::new(slots)
    }

    /// The gate list: one cyclic shift, then `N` modular additions.
    pub fn circuit(&self) -> Result<Circuit> {
        self.validate()?;
        let n = self.n_ctc;
        let mut c = Circuit::new(self.layout()?);
        match self.variant {
            ClonerVariant::Measured => {
                let mut units = vec![vec!["S".to_string()]];
                units.extend((1..=n).map(|i| vec![format!("C{i}")]));
                c.cyclic_shift(&units)?;
                for i in 1..=n {
                    c.mod_add(&format!("C{i}"), &format!("A{i}"))?;
                }
            }
            ClonerVariant::Coherent { .. } => {
                let mut units = vec![vec!["E".to_string(), "B".to_string()]];
                units.extend((1..=n).map(|i| vec![format!("E{i}"), format!("B{i}")]));
                c.cyclic_shift(&units)?;
                for i in 1..=n {
                    c.mod_add(&format!("B{i}"), &format!("A{i}"))?;
                }
            }
        }
        Ok(c)
    }

    pub fn s_labels(&self) -> Vec<String> {
        let mut v = self.input_labels();
        v.extend(self.ancilla_labels());
        v
    }

    pub fn c_labels(&self) -> Vec<String> {
        match self.variant {
            ClonerVariant::Measured => (1..=self.n_ctc).map(|i| format!("C{i}")).collect(),
            ClonerVariant::Coherent { .. } => (1..=self.n_ctc)
                .flat_map(|i| [format!("E{i}"), format!("B{i}")])
                .collect(),
        }
    }

    /// Chronology-respecting input: `input ⊗ |0⟩⟨0|^⊗N` on the ancillas.
    pub fn chronology_input(&self, input: &DensityOperator) -> Result<DensityOperator> {
        let layout = self.layout()?;
        let in_pos = layout.positions_of(&self.input_labels())?;
        let in_layout = layout.select(&in_pos)?;
        let input = input.clone().with_layout(in_layout)?;
        let anc_layout = SubsystemLayout::new(self.ancilla_labels().into_iter().map(|l| (l, self.d)))?;
        input.tensor(&DensityOperator::basis_state(anc_layout, 0)?)
    }
}

/// The cloner as a D-CTC interaction. Refuses construction above the dense cap.
pub fn cloner_interaction(spec: &ClonerSpec) -> Result<DctcInteraction> {
    let total = spec.total_dim()?;
    if total > spec.dense_cap {
        return Err(Error::DenseCapExceeded {
            dimension: total,
            cap: spec.dense_cap,
        });
    }
    let u = spec.circuit()?.compile(spec.dense_cap)?;
    DctcInteraction::new(u, &spec.s_labels(), &spec.c_labels())
}

/// Removes coherences between different values of `slot`.
pub fn decohere_in_basis(rho: &DensityOperator, slot: &str) -> Result<DensityOperator> {
    let layout = rho.layout();
    let pos = layout.index_of(slot)?;
    let stride = layout.strides()[pos];
    let d = layout.dims()[pos];
    let n = rho.dim();
    let mut m = rho.matrix().clone().into_inner();
    for j in 0..n {
        for i in 0..n {
            if (i / stride) % d != (j / stride) % d {
                m[(i, j)] = crate::qmath::C64::new(0.0, 0.0);
            }
        }
    }
    DensityOperator::new(crate::qmath::ComplexMatrix::new(m)?, layout.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ctc::{ctc_output, solve_fixed_point_iterate, IterateOptions};
    use crate::qmath::{partial_trace, trace_distance, ComplexMatrix, C64};

    fn basis(u: &UnitaryOperator, i: usize) -> usize {
        u.permutation_image().unwrap()[i]
    }

    #[test]
    fn cyclic_shift_moves_last_slot_to_front() {
        let u = cyclic_shift_unitary(2, 3).unwrap();
        assert_eq!(basis(&u, 0b101), 0b110);
        let mut p = u.clone();
        for _ in 1..3 {
            p = p.then(&u).unwrap();
        }
        assert_eq!(p, UnitaryOperator::identity(u.layout().clone()));
        let swap = cyclic_shift_unitary(3, 2).unwrap();
        for x in 0..3 {
            for y in 0..3 {
                assert_eq!(basis(&swap, x * 3 + y), y * 3 + x);
            }
        }
        assert!(cyclic_shift_unitary(2, 1).is_err());
    }

    #[test]
    fn modular_addition() {
        let cnot = modular_add_gate(2).unwrap();
        assert_eq!(basis(&cnot, 0b10), 0b11);
        assert_eq!(basis(&cnot, 0b11), 0b10);
        assert_eq!(basis(&cnot, 0b01), 0b01);
        let add3 = modular_add_gate(3).unwrap();
        assert_eq!(basis(&add3, 3 + 2), 3);
        assert!(modular_add_gate(1).is_err());
    }

    #[test]
    fn modular_addition_leaves_diagonal_control_untouched() {
        let u = modular_add_gate(3).unwrap();
        let layout = u.layout().clone();
        let ctrl = DensityOperator::diagonal(&[0.5, 0.3, 0.2], SubsystemLayout::single("control", 3).unwrap()).unwrap();
        let tgt = DensityOperator::maximally_mixed(SubsystemLayout::single("target", 3).unwrap());
        let out = crate::qmath::apply_unitary(&ctrl.tensor(&tgt).unwrap(), &u).unwrap();
        assert_eq!(out.layout(), &layout);
        let c = partial_trace(&out, &["control"]).unwrap();
        assert!(c.matrix().max_abs_diff(ctrl.matrix()).unwrap() < 1e-15);
    }

    #[test]
    fn figure_topology_netlist() {
        let c = ClonerSpec::measured(2, 3).circuit().unwrap();
        let expected = "\
slots S:2 A1:2 A2:2 A3:2 C1:2 C2:2 C3:2
cyclic_shift [S] [C1] [C2] [C3]
mod_add C1 A1
mod_add C2 A2
mod_add C3 A3
";
        assert_eq!(c.netlist(), expected);
        let coherent = ClonerSpec::coherent(2, 4, 1).circuit().unwrap();
        assert_eq!(
            coherent.netlist(),
            "slots E:2 B:4 A1:4 E1:2 B1:4\ncyclic_shift [E B] [E1 B1]\nmod_add B1 A1\n"
        );
    }

    #[test]
    fn cap_is_enforced_with_named_dimension() {
        let spec = ClonerSpec::measured(2, 3).with_dense_cap(100);
        assert_eq!(
            cloner_interaction(&spec).unwrap_err(),
            Error::DenseCapExceeded { dimension: 128, cap: 100 }
        );
        assert!(cloner_interaction(&ClonerSpec::measured(1, 3)).is_err());
        assert!(cloner_interaction(&ClonerSpec::measured(2, 0)).is_err());
    }

    #[test]
    fn measured_cloner_copies_diagonal_state() {
        let spec = ClonerSpec::measured(2, 2);
        let ix = cloner_interaction(&spec).unwrap();
        let rho = DensityOperator::diagonal(&[0.7, 0.3], SubsystemLayout::single("S", 2).unwrap()).unwrap();
        let input = spec.chronology_input(&rho).unwrap();
        let fp = solve_fixed_point_iterate(&ix, &input, None, IterateOptions::default()).unwrap();
        assert_eq!(fp.iterations, 2);
        let copies = rho.tensor_power(2, "C").unwrap();
        assert!(trace_distance(&fp.sigma, &copies).unwrap() < 1e-12);
        let out = ctc_output(&ix, &input, &fp).unwrap();
        let anc = partial_trace(&out, &["A1", "A2"]).unwrap();
        assert!(anc.matrix().max_abs_diff(copies.matrix()).unwrap() < 1e-12);
    }

    #[test]
    fn decoherence_examples() {
        let l = SubsystemLayout::single("S", 2).unwrap();
        let s = 0.5f64.sqrt();
        let plus = DensityOperator::pure(&[C64::new(s, 0.0), C64::new(s, 0.0)], l.clone()).unwrap();
        let out = decohere_in_basis(&plus, "S").unwrap();
        assert!(out.matrix().max_abs_diff(&ComplexMatrix::identity(2).scale(0.5)).unwrap() < 1e-15);
        assert_eq!(decohere_in_basis(&out, "S").unwrap(), out);
        let diag = DensityOperator::diagonal(&[0.2, 0.8], l).unwrap();
        assert_eq!(decohere_in_basis(&diag, "S").unwrap(), diag);
        assert!(matches!(decohere_in_basis(&diag, "Q"), Err(Error::UnknownSlot(_))));
    }

    #[test]
    fn decohere_one_slot_of_many() {
        let l = SubsystemLayout::new([("A", 2), ("B", 2)]).unwrap();
        let s = 0.5;
        let psi = [C64::new(s, 0.0); 4];
        let rho = DensityOperator::pure(&psi, l).unwrap();
        let out = decohere_in_basis(&rho, "B").unwrap();
        // |++⟩ with B decohered: |+⟩⟨+| ⊗ π.
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i % 2 == j % 2 { 0.25 } else { 0.0 };
                assert!((out.matrix().get(i, j).re - expected).abs() < 1e-15);
            }
        }
    }
}
