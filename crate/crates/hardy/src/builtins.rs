//! Named test profiles and fields, so runs are reproducible without data
//! files. Changing any definition here bumps [`BUILTINS_VERSION`].

use hardy_core::profile::{Piece, Term};
use hardy_core::{RadialProfile, ScalarField};

pub const BUILTINS_VERSION: u32 = 1;

pub const PROFILE_NAMES: [&str; 3] = ["step", "twostep", "powerbump"];
pub const FIELD_NAMES: [&str; 3] = ["offset-gaussian", "abs-first", "radial"];

/// * `step`: 1 on (0, 1).
/// * `twostep`: 1 on (0, 1), 1/2 on (1, 2).
/// * `powerbump`: `r^{-1/4}` on (0, 1), `r^{-4}` on (1, inf).
pub fn profile(name: &str) -> Option<RadialProfile> {
    let f = match name {
        "step" => RadialProfile::indicator(0.0, 1.0),
        "twostep" => RadialProfile::new(vec![
            Piece::new(0.0, 1.0, vec![Term::new(1.0, 0.0, 0)]),
            Piece::new(1.0, 2.0, vec![Term::new(0.5, 0.0, 0)]),
        ]),
        "powerbump" => RadialProfile::new(vec![
            Piece::new(0.0, 1.0, vec![Term::new(1.0, -0.25, 0)]),
            Piece::new(1.0, f64::INFINITY, vec![Term::new(1.0, -4.0, 0)]),
        ]),
        _ => return None,
    };
    Some(f.expect("builtin profiles are valid"))
}

/// Fields on `R^n`:
/// * `offset-gaussian`: `exp(-|y - e_1|^2)` cut off at `|y| <= 6`.
/// * `abs-first`: `|y_1|` on `|y| <= 2`.
/// * `radial`: the indicator of the unit ball.
pub fn field(name: &str, n: u32) -> Option<ScalarField> {
    match name {
        "offset-gaussian" => {
            let mut center = vec![0.0; n as usize];
            if let Some(c) = center.first_mut() {
                *c = 1.0;
            }
            Some(ScalarField::offset_gaussian(center, 6.0))
        }
        "abs-first" => Some(ScalarField::abs_first_coordinate(2.0)),
        "radial" => Some(ScalarField::radial(profile("step")?)),
        _ => None,
    }
}
