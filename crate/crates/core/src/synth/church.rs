use super::SynthError;
use crate::spec::MealyTransducer;

/// Makes the transducer total: every missing move goes to a sink that
/// answers `o0` forever. Behavior on the original domain is unchanged.
pub fn totalize_for_church(t: &MealyTransducer, o0: &str) -> Result<MealyTransducer, SynthError> {
    let out = t
        .outputs()
        .id(o0)
        .ok_or_else(|| SynthError::AlphabetMismatch(o0.to_string()))?;
    let mut total = t.clone();
    let mut name = String::from("_sink");
    while total.state_id(&name).is_some() {
        name.push('_');
    }
    let sink = total.add_state(&name);
    for s in 0..total.num_states() {
        for a in t.inputs().ids() {
            if total.step(s, a).is_none() {
                total.add_transition(s, a, out, sink)?;
            }
        }
    }
    Ok(total)
}
