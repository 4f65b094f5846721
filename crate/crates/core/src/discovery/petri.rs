use serde::{Deserialize, Serialize};

pub type PlaceId = usize;
pub type TransitionId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    /// Activity label; `None` for silent transitions.
    pub label: Option<String>,
    pub inputs: Vec<PlaceId>,
    pub outputs: Vec<PlaceId>,
}

impl Transition {
    pub fn is_silent(&self) -> bool {
        self.label.is_none()
    }
}

/// Place/transition net with unit arc weights and a single initial and final place.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PetriNet {
    pub places: Vec<String>,
    pub transitions: Vec<Transition>,
    pub initial_place: PlaceId,
    pub final_place: PlaceId,
}

impl PetriNet {
    /// A net holding only its initial and final places.
    pub fn new() -> Self {
        Self {
            places: vec!["source".into(), "sink".into()],
            transitions: Vec::new(),
            initial_place: 0,
            final_place: 1,
        }
    }

    pub fn add_place(&mut self, name: impl Into<String>) -> PlaceId {
        self.places.push(name.into());
        self.places.len() - 1
    }

    pub fn add_transition(
        &mut self,
        label: Option<String>,
        inputs: Vec<PlaceId>,
        outputs: Vec<PlaceId>,
    ) -> TransitionId {
        let mut inputs = inputs;
        let mut outputs = outputs;
        inputs.sort_unstable();
        inputs.dedup();
        outputs.sort_unstable();
        outputs.dedup();
        self.transitions.push(Transition { label, inputs, outputs });
        self.transitions.len() - 1
    }

    pub fn n_places(&self) -> usize {
        self.places.len()
    }

    pub fn n_arcs(&self) -> usize {
        self.transitions.iter().map(|t| t.inputs.len() + t.outputs.len()).sum()
    }

    pub fn visible(&self) -> impl Iterator<Item = (TransitionId, &Transition)> {
        self.transitions.iter().enumerate().filter(|(_, t)| !t.is_silent())
    }

    pub fn n_visible(&self) -> usize {
        self.visible().count()
    }

    pub fn n_silent(&self) -> usize {
        self.transitions.len() - self.n_visible()
    }

    /// Transitions consuming from each place.
    pub fn consumers(&self) -> Vec<Vec<TransitionId>> {
        let mut out = vec![Vec::new(); self.places.len()];
        for (t, tr) in self.transitions.iter().enumerate() {
            for &p in &tr.inputs {
                out[p].push(t);
            }
        }
        out
    }

    /// Every transition has an input and an output, and every arc points at a real place.
    pub fn is_well_formed(&self) -> bool {
        self.initial_place < self.places.len()
            && self.final_place < self.places.len()
            && self.initial_place != self.final_place
            && self.transitions.iter().all(|t| {
                !t.inputs.is_empty()
                    && !t.outputs.is_empty()
                    && t.inputs.iter().chain(&t.outputs).all(|&p| p < self.places.len())
            })
    }
}

impl Default for PetriNet {
    fn default() -> Self {
        Self::new()
    }
}
